//! The two-round protocols.
//!
//! Bob speaks first, sending random codewords of the privacy-pair code `C`
//! over the channels; Alice answers with broadcasts only. Alice and Bob keep
//! separate state and exchange data solely through a [`Medium`].

mod audit;
pub mod cost;
mod basic;
mod improved;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::broadcast::{self, BroadcastError};
use crate::channels::{ChannelError, CostLedger, Direction, EveView, Medium, Transcript};
use crate::gf::{Fe, Field};
use crate::mds::{self, CodeError, MaskVector, ReedSolomon, Word};
use crate::pseudobasis::PseudoBasisError;

pub use audit::{
    audit_distributions, check_budget, privacy_audit, tuple_codewords, AuditError, AuditProtocol, AuditReport, AuditVerdict,
};
pub use basic::{run_basic, run_basic_with, send_pseudo_basis_incremental};
pub use improved::{
    run_improved, run_improved_with, send_masked_secrets, send_pseudo_basis_fast,
    special_word_search, FastPseudoBasis, SpecialStep, SpecialWord,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("expected {expected} secrets, got {got}")]
    SecretCount { expected: usize, got: usize },
    #[error("protocol violation: {0}")]
    Violation(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Broadcast(#[from] BroadcastError),
    #[error(transparent)]
    PseudoBasis(#[from] PseudoBasisError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionParams {
    pub n: usize,
    pub t: usize,
    pub l: usize,
    pub field: Field,
    pub seed: u64,
}

impl SessionParams {
    /// `t = (n-1)/2`.
    pub fn new(n: usize, l: usize, field: Field, seed: u64) -> Result<Self, ProtocolError> {
        Self::with_t(n, n.saturating_sub(1) / 2, l, field, seed)
    }

    pub fn with_t(
        n: usize,
        t: usize,
        l: usize,
        field: Field,
        seed: u64,
    ) -> Result<Self, ProtocolError> {
        let p = SessionParams { n, t, l, field, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidParams(m));
        if self.t == 0 || self.n != 2 * self.t + 1 {
            return bad(format!("n must equal 2t+1 with t >= 1 (n = {}, t = {})", self.n, self.t));
        }
        if self.field.order() as usize <= self.n {
            return bad(format!(
                "field order {} must exceed n = {}",
                self.field.order(),
                self.n
            ));
        }
        if self.l == 0 {
            return bad("at least one secret is required".into());
        }
        Ok(())
    }
}

/// Where Bob's round-one codewords come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodewordSource {
    Random(u64),
    Fixed(Vec<Word>),
}

impl CodewordSource {
    pub(crate) fn draw(&self, code: &ReedSolomon, count: usize) -> Result<Vec<Word>, ProtocolError> {
        match self {
            CodewordSource::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..count).map(|_| code.random_codeword(&mut rng)).collect())
            }
            CodewordSource::Fixed(words) => {
                if words.len() != count || !words.iter().all(|w| code.is_codeword(w)) {
                    return Err(ProtocolError::InvalidParams(format!(
                        "need {count} codewords of the protocol code"
                    )));
                }
                Ok(words.clone())
            }
        }
    }
}

/// Which rule Bob used to open the masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `2|S| >= t`: rebuild `y` from its syndrome and open `z1`.
    Syndrome,
    /// `2|S| < t`: Alice decoded correctly; open `z2` with `x`.
    Decoded,
}

/// Harness-side facts about the special word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialWordReport {
    pub step: SpecialStep,
    pub coefficients: Vec<Fe>,
    /// Weight of the adversary's actual error on the special word.
    pub true_error_weight: usize,
}

#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub delivered: Vec<Fe>,
    pub transcript: Transcript,
    pub ledger: CostLedger,
    pub eve_view: EveView,
    pub corrupted: BTreeSet<usize>,
    /// Bob's codewords and what Alice received.
    pub codewords: Vec<Word>,
    pub received: Vec<Word>,
    pub pseudo_basis: Vec<usize>,
    /// Improved protocol only.
    pub special: Option<SpecialWordReport>,
    pub generalized_m: Option<usize>,
    pub branch: Option<Branch>,
}

/// The public code and mask vector for `(n, t, field)`.
pub fn setup(params: &SessionParams) -> Result<(ReedSolomon, MaskVector), ProtocolError> {
    params.validate()?;
    Ok(mds::build_privacy_pair(params.n, params.t, &params.field)?)
}

/// Base-`q` digits needed for an index below `count` (at least one).
pub fn index_digits(q: u32, count: usize) -> usize {
    let mut d = 1;
    let mut cap = q as u128;
    while cap < count as u128 {
        cap *= q as u128;
        d += 1;
    }
    d
}

pub(crate) fn encode_index(index: usize, digits: usize, q: u32) -> Vec<Fe> {
    let mut out = vec![Fe::ZERO; digits];
    let mut v = index;
    for slot in out.iter_mut().rev() {
        *slot = Fe((v % q as usize) as u32);
        v /= q as usize;
    }
    out
}

pub(crate) fn decode_index(digits: &[Fe], q: u32) -> usize {
    digits
        .iter()
        .fold(0usize, |acc, d| acc * q as usize + d.0 as usize)
}

/// `w`, then each index as base-`q` digits, then optional coefficients.
pub(crate) fn overhead_payload(
    indices: &[usize],
    coefficients: Option<&[Fe]>,
    digits: usize,
    q: u32,
) -> Vec<Fe> {
    let mut payload = vec![Fe(indices.len() as u32)];
    for &i in indices {
        payload.extend(encode_index(i, digits, q));
    }
    if let Some(c) = coefficients {
        payload.extend_from_slice(c);
    }
    payload
}

/// Bob's parse of the overhead broadcast: indices and trailing coefficients.
pub(crate) fn parse_overhead(
    payload: &[Fe],
    digits: usize,
    q: u32,
    words: usize,
) -> Result<(Vec<usize>, Vec<Fe>), ProtocolError> {
    let violation = |m: &str| ProtocolError::Violation(m.to_string());
    let w = payload.first().ok_or_else(|| violation("empty overhead"))?.0 as usize;
    let end = 1 + w * digits;
    if payload.len() < end {
        return Err(violation("overhead shorter than its index list"));
    }
    let indices: Vec<usize> = payload[1..end]
        .chunks(digits)
        .map(|c| decode_index(c, q))
        .collect();
    if indices.windows(2).any(|p| p[0] >= p[1]) || indices.iter().any(|&i| i >= words) {
        return Err(violation("pseudo-basis indices out of order or range"));
    }
    Ok((indices, payload[end..].to_vec()))
}

/// Sends `symbols` by plain broadcast and returns Bob's majority decoding.
pub(crate) fn plain_broadcast<M: Medium>(
    medium: &mut M,
    phase: &'static str,
    symbols: &[Fe],
) -> Result<Vec<Fe>, ProtocolError> {
    let block = broadcast::broadcast_encode(symbols, medium.n());
    let delivered = medium.transmit(Direction::AliceToBob, phase, block.arrays, Some(symbols.to_vec()))?;
    Ok(broadcast::broadcast_decode(&delivered)?)
}

/// Sends `symbols` by `m`-generalized broadcast and returns the delivered
/// arrays, which Bob decodes once he knows enough bad channels.
pub(crate) fn generalized_broadcast<M: Medium>(
    medium: &mut M,
    phase: &'static str,
    m: usize,
    symbols: &[Fe],
) -> Result<Vec<Vec<Fe>>, ProtocolError> {
    let n = medium.n();
    let block = broadcast::gen_broadcast_encode(m, symbols, medium.field(), n)?;
    Ok(medium.transmit(Direction::AliceToBob, phase, block.arrays, Some(symbols.to_vec()))?)
}

pub(crate) fn check_secrets(params: &SessionParams, secrets: &[Fe]) -> Result<(), ProtocolError> {
    if secrets.len() != params.l {
        return Err(ProtocolError::SecretCount {
            expected: params.l,
            got: secrets.len(),
        });
    }
    if let Some(s) = secrets.iter().find(|s| !params.field.contains(**s)) {
        return Err(ProtocolError::InvalidParams(format!(
            "secret {} is not a field element",
            s.0
        )));
    }
    Ok(())
}

/// Splits a flat symbol list into length-`n` words.
pub(crate) fn unflatten(symbols: &[Fe], n: usize) -> Vec<Word> {
    symbols.chunks(n).map(<[Fe]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_digit_counts() {
        assert_eq!(index_digits(7, 1), 1);
        assert_eq!(index_digits(7, 7), 1);
        assert_eq!(index_digits(7, 8), 2);
        assert_eq!(index_digits(13, 127), 2);
        assert_eq!(index_digits(29, 535), 2);
    }

    #[test]
    fn index_round_trip() {
        for i in 0..49 {
            let d = encode_index(i, 2, 7);
            assert_eq!(decode_index(&d, 7), i);
        }
        assert_eq!(encode_index(10, 2, 7), vec![Fe(1), Fe(3)]);
    }

    #[test]
    fn overhead_round_trip() {
        let payload = overhead_payload(&[0, 3, 12], Some(&[Fe(1), Fe(2), Fe(0)]), 2, 7);
        assert_eq!(payload.len(), 1 + 6 + 3);
        let (idx, rest) = parse_overhead(&payload, 2, 7, 13).unwrap();
        assert_eq!(idx, vec![0, 3, 12]);
        assert_eq!(rest, vec![Fe(1), Fe(2), Fe(0)]);
        assert!(parse_overhead(&payload, 2, 7, 12).is_err());
    }

    #[test]
    fn params_validation() {
        let f = Field::prime(7).unwrap();
        assert!(SessionParams::new(5, 1, f.clone(), 0).is_ok());
        assert!(SessionParams::with_t(6, 2, 1, f.clone(), 0).is_err());
        assert!(SessionParams::new(7, 1, f.clone(), 0).is_err());
        assert!(SessionParams::new(5, 0, f, 0).is_err());
    }
}
