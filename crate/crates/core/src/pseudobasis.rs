//! Pseudo-bases (syndrome-spanning subsets) and recovery of errors from
//! their syndromes.
//!
//! Given received words `y_j = x_j + e_j` whose errors all live on fewer than
//! `d` common coordinates, the syndrome map is injective on the span of the
//! errors. A pseudo-basis of the `y_j` therefore yields, once the original
//! codewords are subtracted, a basis of that error space, and any error in it
//! can be rebuilt from its syndrome alone.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::gf::Fe;
use crate::linalg::{self, EchelonSpan};
use crate::mds::{CodeError, LinearCode, Syndrome, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PseudoBasisError {
    #[error("no original codeword for word index {0}")]
    MissingOriginal(usize),
    #[error("syndrome is outside the span of the error basis")]
    OutsideSpan,
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PseudoBasis {
    /// `(position in the input list, word)`, in input order.
    pub entries: Vec<(usize, Word)>,
    pub syndromes: Vec<Syndrome>,
}

impl PseudoBasis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|(i, _)| *i).collect()
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.entries.iter().any(|(i, _)| *i == index)
    }
}

/// Keeps each word whose syndrome is outside the span of the syndromes kept
/// so far, scanning in input order.
pub fn compute_pseudo_basis<C: LinearCode + ?Sized>(
    code: &C,
    words: &[Word],
) -> Result<PseudoBasis, CodeError> {
    let mut span = EchelonSpan::new(code.field());
    let mut pb = PseudoBasis::default();
    for (i, w) in words.iter().enumerate() {
        let s = code.syndrome(w)?;
        if span.insert(&s) {
            pb.entries.push((i, w.clone()));
            pb.syndromes.push(s);
        }
    }
    Ok(pb)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ErrorBasis {
    /// `(word index, y - x)` for each pseudo-basis entry.
    pub errors: Vec<(usize, Word)>,
    pub syndromes: Vec<Syndrome>,
    /// Union of the supports of all errors.
    pub support: BTreeSet<usize>,
}

impl ErrorBasis {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Subtracts the original codewords (indexed like the received list) from
/// the pseudo-basis words.
pub fn extract_error_basis<C: LinearCode + ?Sized>(
    code: &C,
    pb: &PseudoBasis,
    originals: &[Word],
) -> Result<ErrorBasis, PseudoBasisError> {
    let field = code.field();
    let mut eb = ErrorBasis::default();
    for ((index, y), syn) in pb.entries.iter().zip(&pb.syndromes) {
        let x = originals
            .get(*index)
            .ok_or(PseudoBasisError::MissingOriginal(*index))?;
        if x.len() != y.len() {
            return Err(CodeError::LengthMismatch {
                expected: y.len(),
                got: x.len(),
            }
            .into());
        }
        let e = field.sub_vec(y, x);
        eb.support.extend(crate::mds::support(&e));
        eb.errors.push((*index, e));
        eb.syndromes.push(syn.clone());
    }
    Ok(eb)
}

/// The unique error in the span of `eb` whose syndrome is `target`.
pub fn recover_error<C: LinearCode + ?Sized>(
    eb: &ErrorBasis,
    code: &C,
    target: &[Fe],
) -> Result<Word, PseudoBasisError> {
    let field = code.field();
    let r = code.redundancy();
    if target.len() != r {
        return Err(CodeError::LengthMismatch {
            expected: r,
            got: target.len(),
        }
        .into());
    }
    let n = code.length();
    if eb.is_empty() {
        return if target.iter().all(|x| x.is_zero()) {
            Ok(vec![Fe::ZERO; n])
        } else {
            Err(PseudoBasisError::OutsideSpan)
        };
    }
    // Columns are the basis syndromes.
    let a: Vec<Vec<Fe>> = (0..r)
        .map(|row| eb.syndromes.iter().map(|s| s[row]).collect())
        .collect();
    let lambda = linalg::solve(field, &a, target).ok_or(PseudoBasisError::OutsideSpan)?;
    let mut e = vec![Fe::ZERO; n];
    for (&c, (_, err)) in lambda.iter().zip(&eb.errors) {
        field.axpy(&mut e, c, err);
    }
    Ok(e)
}
