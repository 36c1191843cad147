//! Reliable, public transmission over `n = 2t+1` channels.
//!
//! Plain broadcast repeats each symbol on every channel and decodes by
//! majority. `m`-generalized broadcast sends `m+1` symbols per array as a
//! codeword of an `[n, m+1, n-m]` Reed-Solomon code; a receiver that knows
//! `m` corrupted channels erases them and decodes the punctured code.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::gf::{Fe, Field};
use crate::mds::{CodeError, ReedSolomon};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BroadcastError {
    #[error("array {0} has no strict majority value")]
    NoMajority(usize),
    #[error("array {array} has length {got}, expected {expected}")]
    ArrayLength {
        array: usize,
        expected: usize,
        got: usize,
    },
    #[error("generalized broadcast parameter m = {m} exceeds t = {t}")]
    ParameterTooLarge { m: usize, t: usize },
    #[error("receiver knows {known} corrupted channels, needs at least {m}")]
    NotEnoughKnownBad { known: usize, m: usize },
    #[error("array {0} could not be decoded")]
    DecodeFailure(usize),
    #[error("block carries {available} symbols, {requested} requested")]
    PayloadLength { available: usize, requested: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroadcastMode {
    Plain,
    Generalized(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadcastBlock {
    pub mode: BroadcastMode,
    pub payload: Vec<Fe>,
    /// Zero symbols appended to fill the last chunk.
    pub padding: usize,
    /// One length-`n` array per channel use.
    pub arrays: Vec<Vec<Fe>>,
}

impl BroadcastBlock {
    pub fn wire_symbols(&self) -> usize {
        self.arrays.iter().map(Vec::len).sum()
    }
}

pub fn broadcast_encode(symbols: &[Fe], n: usize) -> BroadcastBlock {
    BroadcastBlock {
        mode: BroadcastMode::Plain,
        payload: symbols.to_vec(),
        padding: 0,
        arrays: symbols.iter().map(|&s| vec![s; n]).collect(),
    }
}

/// Strict-majority decoding of each array.
pub fn broadcast_decode(arrays: &[Vec<Fe>]) -> Result<Vec<Fe>, BroadcastError> {
    arrays
        .iter()
        .enumerate()
        .map(|(i, a)| majority(a).ok_or(BroadcastError::NoMajority(i)))
        .collect()
}

fn majority(a: &[Fe]) -> Option<Fe> {
    let mut sorted = a.to_vec();
    sorted.sort_unstable();
    let (mut best, mut best_count) = (None, 0);
    let mut run = 0;
    for i in 0..sorted.len() {
        run = if i > 0 && sorted[i] == sorted[i - 1] { run + 1 } else { 1 };
        if run > best_count {
            best_count = run;
            best = Some(sorted[i]);
        }
    }
    (2 * best_count > a.len()).then_some(best).flatten()
}

/// Wire cost in symbols of sending `symbols` payload symbols with
/// `m`-generalized broadcast over `n` channels.
pub fn gen_broadcast_cost(m: usize, symbols: usize, n: usize) -> usize {
    symbols.div_ceil(m + 1) * n
}

fn broadcast_code(m: usize, field: &Field, n: usize) -> Result<ReedSolomon, BroadcastError> {
    let t = (n - 1) / 2;
    if m > t {
        return Err(BroadcastError::ParameterTooLarge { m, t });
    }
    Ok(ReedSolomon::new(n, m + 1, field)?)
}

pub fn gen_broadcast_encode(
    m: usize,
    symbols: &[Fe],
    field: &Field,
    n: usize,
) -> Result<BroadcastBlock, BroadcastError> {
    let code = broadcast_code(m, field, n)?;
    let chunks = symbols.len().div_ceil(m + 1);
    let padding = chunks * (m + 1) - symbols.len();
    let arrays = symbols
        .chunks(m + 1)
        .map(|chunk| {
            let mut message = chunk.to_vec();
            message.resize(m + 1, Fe::ZERO);
            code.encode(&message)
        })
        .collect::<Result<_, _>>()?;
    Ok(BroadcastBlock {
        mode: BroadcastMode::Generalized(m),
        payload: symbols.to_vec(),
        padding,
        arrays,
    })
}

/// Decodes an `m`-generalized broadcast, erasing the `known_bad` channels,
/// and returns the first `payload_len` symbols.
pub fn gen_broadcast_decode(
    m: usize,
    arrays: &[Vec<Fe>],
    known_bad: &BTreeSet<usize>,
    field: &Field,
    n: usize,
    payload_len: usize,
) -> Result<Vec<Fe>, BroadcastError> {
    if known_bad.len() < m {
        return Err(BroadcastError::NotEnoughKnownBad {
            known: known_bad.len(),
            m,
        });
    }
    let code = broadcast_code(m, field, n)?;
    let keep: Vec<usize> = (0..n).filter(|i| !known_bad.contains(i)).collect();
    let punctured = code.restrict(&keep)?;
    let mut out = Vec::with_capacity(arrays.len() * (m + 1));
    for (i, a) in arrays.iter().enumerate() {
        if a.len() != n {
            return Err(BroadcastError::ArrayLength {
                array: i,
                expected: n,
                got: a.len(),
            });
        }
        let visible: Vec<Fe> = keep.iter().map(|&j| a[j]).collect();
        let decoded = punctured
            .decode(&visible)
            .ok_or(BroadcastError::DecodeFailure(i))?;
        out.extend(decoded.message);
    }
    if out.len() < payload_len {
        return Err(BroadcastError::PayloadLength {
            available: out.len(),
            requested: payload_len,
        });
    }
    out.truncate(payload_len);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[u32]) -> Vec<Fe> {
        xs.iter().map(|&x| Fe(x)).collect()
    }

    #[test]
    fn plain_round_trip() {
        let block = broadcast_encode(&[Fe(4)], 5);
        assert_eq!(block.arrays, vec![v(&[4, 4, 4, 4, 4])]);
        assert_eq!(broadcast_decode(&block.arrays).unwrap(), v(&[4]));
        assert!(broadcast_encode(&[], 5).arrays.is_empty());
        assert_eq!(broadcast_encode(&v(&[1, 2, 3]), 5).wire_symbols(), 15);
    }

    #[test]
    fn majority_decoding() {
        assert_eq!(broadcast_decode(&[v(&[4, 4, 4, 9, 9])]).unwrap(), v(&[4]));
        assert_eq!(
            broadcast_decode(&[v(&[1, 1, 1]), v(&[1, 2, 3])]),
            Err(BroadcastError::NoMajority(1))
        );
    }

    #[test]
    fn zero_generalized_is_repetition() {
        let f = Field::prime(7).unwrap();
        let block = gen_broadcast_encode(0, &v(&[3, 5]), &f, 5).unwrap();
        assert_eq!(block.arrays, broadcast_encode(&v(&[3, 5]), 5).arrays);
    }

    #[test]
    fn chunking_and_padding() {
        let f = Field::prime(7).unwrap();
        let three = gen_broadcast_encode(2, &v(&[1, 2, 3]), &f, 5).unwrap();
        assert_eq!(three.arrays.len(), 1);
        assert_eq!(three.wire_symbols(), 5);
        assert_eq!(three.arrays[0], ReedSolomon::new(5, 3, &f).unwrap().encode(&v(&[1, 2, 3])).unwrap());
        let four = gen_broadcast_encode(2, &v(&[1, 2, 3, 4]), &f, 5).unwrap();
        assert_eq!((four.arrays.len(), four.padding, four.wire_symbols()), (2, 2, 10));
        assert_eq!(gen_broadcast_cost(2, 4, 5), 10);
        assert!(matches!(
            gen_broadcast_encode(3, &v(&[1]), &f, 5),
            Err(BroadcastError::ParameterTooLarge { m: 3, t: 2 })
        ));
    }

    #[test]
    fn generalized_decode_with_erasures_and_errors() {
        let f = Field::prime(7).unwrap();
        let payload = v(&[6, 0, 2, 5]);
        // m = 2, both bad channels known and overwritten.
        let mut block = gen_broadcast_encode(2, &payload, &f, 5).unwrap();
        for a in block.arrays.iter_mut() {
            a[1] = Fe(3);
            a[4] = f.add(a[4], Fe(1));
        }
        let known = BTreeSet::from([1, 4]);
        assert_eq!(gen_broadcast_decode(2, &block.arrays, &known, &f, 5, 4).unwrap(), payload);
        // m = 1, one known bad channel and one unknown.
        let mut block = gen_broadcast_encode(1, &payload, &f, 5).unwrap();
        for a in block.arrays.iter_mut() {
            a[0] = f.add(a[0], Fe(2));
            a[3] = f.add(a[3], Fe(6));
        }
        let known = BTreeSet::from([0]);
        assert_eq!(gen_broadcast_decode(1, &block.arrays, &known, &f, 5, 4).unwrap(), payload);
        assert!(matches!(
            gen_broadcast_decode(2, &block.arrays, &known, &f, 5, 4),
            Err(BroadcastError::NotEnoughKnownBad { known: 1, m: 2 })
        ));
    }

    #[test]
    fn generalized_no_corruption() {
        let f = Field::prime(7).unwrap();
        let payload = v(&[1, 2, 3]);
        let block = gen_broadcast_encode(0, &payload, &f, 5).unwrap();
        let out = gen_broadcast_decode(0, &block.arrays, &BTreeSet::new(), &f, 5, 3).unwrap();
        assert_eq!(out, payload);
    }
}
