//! Exhaustive privacy audit: for every secret, run the protocol on every
//! possible choice of Bob's codewords and compare the resulting multisets of
//! Eve's views.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::channels::builtin_adversary;
use crate::gf::{Fe, Field};
use crate::mds::Word;

use super::{
    run_basic_with, run_improved_with, setup, CodewordSource, ProtocolError, SessionParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditProtocol {
    Basic,
    Improved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditVerdict {
    Pass,
    /// `view` occurs `count` times under `secret` but `reference_count` times
    /// under `reference`.
    Fail {
        secret: Fe,
        reference: Fe,
        view: Vec<u32>,
        count: u64,
        reference_count: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    pub verdict: AuditVerdict,
    pub runs: u64,
    /// Distinct views seen under the first secret.
    pub distinct_views: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("audit needs {required} protocol runs, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("unknown adversary {0:?}")]
    UnknownAdversary(String),
    #[error("secret {0} was not delivered correctly during the audit")]
    Unreliable(u32),
    #[error("audit setup failed: {0}")]
    Setup(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// `q^exponent` if it fits within `budget`, otherwise a budget error.
pub fn check_budget(q: u32, exponent: usize, budget: u64) -> Result<u64, AuditError> {
    let fits = (q as u128)
        .checked_pow(exponent as u32)
        .filter(|&v| v <= budget as u128);
    match fits {
        Some(v) => Ok(v as u64),
        None => Err(AuditError::BudgetExceeded {
            required: format!("{q}^{exponent}"),
            budget,
        }),
    }
}

/// Runs `run(secret, tuple)` for every secret and every tuple index below
/// `tuples`, comparing the view multisets of each secret with the first.
/// `run` returns Eve's view key and whether the secret was delivered.
pub fn audit_distributions<F>(secrets: &[Fe], tuples: u64, run: F) -> Result<AuditReport, AuditError>
where
    F: Fn(Fe, u64) -> Result<(Vec<u32>, bool), ProtocolError> + Sync,
{
    let histogram = |s: Fe| -> Result<HashMap<Vec<u32>, u64>, AuditError> {
        (0..tuples)
            .into_par_iter()
            .try_fold(HashMap::new, |mut acc, i| {
                let (view, ok) = run(s, i)?;
                if !ok {
                    return Err(AuditError::Unreliable(s.0));
                }
                *acc.entry(view).or_insert(0u64) += 1;
                Ok(acc)
            })
            .try_reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                Ok(a)
            })
    };
    let Some((&reference, rest)) = secrets.split_first() else {
        return Ok(AuditReport {
            verdict: AuditVerdict::Pass,
            runs: 0,
            distinct_views: 0,
        });
    };
    let base = histogram(reference)?;
    let mut runs = tuples;
    for &s in rest {
        let h = histogram(s)?;
        runs += tuples;
        let differing = base
            .iter()
            .find(|(k, v)| h.get(*k) != Some(v))
            .map(|(k, _)| k.clone())
            .or_else(|| h.keys().find(|k| !base.contains_key(*k)).cloned());
        if let Some(view) = differing {
            return Ok(AuditReport {
                verdict: AuditVerdict::Fail {
                    secret: s,
                    reference,
                    count: h.get(&view).copied().unwrap_or(0),
                    reference_count: base.get(&view).copied().unwrap_or(0),
                    view,
                },
                runs,
                distinct_views: base.len(),
            });
        }
    }
    Ok(AuditReport {
        verdict: AuditVerdict::Pass,
        runs,
        distinct_views: base.len(),
    })
}

/// Decodes tuple index `i` into `count` codewords of a `k`-dimensional code
/// via its base-`q` digits.
pub fn tuple_codewords(
    mut i: u64,
    count: usize,
    k: usize,
    q: u32,
    encode: impl Fn(&[Fe]) -> Word,
) -> Vec<Word> {
    (0..count)
        .map(|_| {
            let msg: Vec<Fe> = (0..k)
                .map(|_| {
                    let d = (i % q as u64) as u32;
                    i /= q as u64;
                    Fe(d)
                })
                .collect();
            encode(&msg)
        })
        .collect()
}

/// Exhaustive audit of a classical protocol with one secret against the
/// named built-in adversary, rebuilt from `seed` for every run.
pub fn privacy_audit(
    protocol: AuditProtocol,
    n: usize,
    t: usize,
    field: &Field,
    adversary: &str,
    seed: u64,
    budget: u64,
) -> Result<AuditReport, AuditError> {
    if builtin_adversary(adversary, seed).is_none() {
        return Err(AuditError::UnknownAdversary(adversary.to_string()));
    }
    let params = SessionParams::with_t(n, t, 1, field.clone(), seed)?;
    let (code, _) = setup(&params)?;
    let words = match protocol {
        AuditProtocol::Basic => t + 1,
        AuditProtocol::Improved => t + 2,
    };
    let k = t + 1;
    let q = field.order();
    check_budget(q, k * words + 1, budget)?;
    let tuples = (q as u64).pow((k * words) as u32);
    let secrets: Vec<Fe> = field.elements().collect();
    audit_distributions(&secrets, tuples, |s, i| {
        let xs = tuple_codewords(i, words, k, q, |m| code.encode(m).expect("message length k"));
        let adv = builtin_adversary(adversary, seed).expect("checked above");
        let source = CodewordSource::Fixed(xs);
        let out = match protocol {
            AuditProtocol::Basic => run_basic_with(&params, &[s], adv, &source)?,
            AuditProtocol::Improved => run_improved_with(&params, &[s], adv, &source)?,
        };
        Ok((out.eve_view.key(), out.delivered == [s]))
    })
}
