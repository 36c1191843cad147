//! Closed-form symbol counts of the two classical protocols, as functions of
//! the parameters and the pseudo-basis size `w`.

use super::index_digits;

/// Symbols per ledger phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseCosts {
    pub round1: u64,
    pub pseudo_basis: u64,
    pub pb_overhead: u64,
    pub masked_secrets: u64,
}

impl PhaseCosts {
    pub fn total(&self) -> u64 {
        self.round1 + self.pseudo_basis + self.pb_overhead + self.masked_secrets
    }
}

pub fn basic_costs(n: usize, t: usize, l: usize, q: u32, w: usize) -> PhaseCosts {
    let d = index_digits(q, t + l);
    PhaseCosts {
        round1: ((t + l) * n) as u64,
        pseudo_basis: (w * n * n) as u64,
        pb_overhead: ((1 + w * d) * n) as u64,
        masked_secrets: (l * (t + 1) * n) as u64,
    }
}

pub fn improved_costs(n: usize, t: usize, l: usize, q: u32, w: usize) -> PhaseCosts {
    let d = index_digits(q, t + l + 1);
    let m = w.min(t / 3);
    let (pb, coefficients) = if m > 0 {
        (n * n + (w * n).div_ceil(m + 1) * n, w)
    } else {
        (w * n * n, 0)
    };
    PhaseCosts {
        round1: ((t + l + 1) * n) as u64,
        pseudo_basis: pb as u64,
        pb_overhead: ((1 + w * d + coefficients) * n) as u64,
        masked_secrets: (((l * t).div_ceil(t.div_ceil(2) + 1) + 2 * l) * n) as u64,
    }
}

/// Constants `(c0, c1)` of the bound `5nl + 4n^2 + c0*n*t + c1*n` on the
/// improved protocol's total: `c0 = D + 2` covers per-word index digits, the
/// special-word coefficient and the extra round-one words, `c1 = 2` the
/// count symbol and the last round-one word.
pub fn improved_bound_constants(n: usize, l: usize, q: u32) -> (u64, u64) {
    let t = (n - 1) / 2;
    (index_digits(q, t + l + 1) as u64 + 2, 2)
}

/// Upper bound on the improved protocol's total symbols over all `w <= t`.
pub fn improved_bound(n: usize, t: usize, l: usize, q: u32) -> u64 {
    let (c0, c1) = improved_bound_constants(n, l, q);
    let (n, t, l) = (n as u64, t as u64, l as u64);
    5 * n * l + 4 * n * n + c0 * n * t + c1 * n
}
