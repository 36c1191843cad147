//! `psmt bench`: measured cost of the improved protocol against the closed
//! form and the `5nl + 4n^2 + c0*n*t + c1*n` bound.

use std::str::FromStr;

use num_rational::Ratio;
use psmt::protocols::cost::{improved_bound, improved_bound_constants, improved_costs};
use psmt::protocols::{run_improved, SessionParams};
use psmt::channels::builtin_adversary;
use psmt::{Fe, Field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{csv_with_schema, ratio_decimal, ratio_string, splitmix64, trial_seed, CliError};

/// Number of secrets as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LRule {
    Fixed(usize),
    N,
    NSquared,
    /// `n * ceil(log2 n)`.
    NLogN,
}

impl LRule {
    pub fn eval(self, n: usize) -> usize {
        match self {
            LRule::Fixed(l) => l,
            LRule::N => n,
            LRule::NSquared => n * n,
            LRule::NLogN => n * (usize::BITS - (n - 1).leading_zeros()) as usize,
        }
    }
}

impl FromStr for LRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n" => Ok(LRule::N),
            "n^2" | "n2" => Ok(LRule::NSquared),
            "nlogn" => Ok(LRule::NLogN),
            _ => s
                .parse()
                .ok()
                .filter(|&l| l > 0)
                .map(LRule::Fixed)
                .ok_or_else(|| format!("expected a positive integer, n, n^2 or nlogn, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub ns: Vec<usize>,
    pub ls: Vec<LRule>,
    pub adversary: String,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub n: usize,
    pub t: usize,
    pub q: u32,
    pub l: usize,
    pub trials: u64,
    pub successes: u64,
    pub w_max: usize,
    pub max_symbols: u64,
    /// Every trial's total equals the closed form for its pseudo-basis size.
    pub closed_form_ok: bool,
    pub c0: u64,
    pub c1: u64,
    pub bound_symbols: u64,
    pub bits_per_symbol: u32,
}

impl BenchRow {
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.max_symbols, self.l as u64)
    }

    pub fn bound_rate(&self) -> Ratio<u64> {
        Ratio::new(self.bound_symbols, self.l as u64)
    }

    pub fn within_bound(&self) -> bool {
        self.max_symbols <= self.bound_symbols
    }
}

pub fn bench_point(n: usize, l: usize, adversary: &str, trials: u64, seed: u64) -> Result<BenchRow, CliError> {
    let field = Field::smallest_prime_above(n as u64);
    let t = (n.max(1) - 1) / 2;
    let q = field.order();
    let params = SessionParams::new(n, l, field.clone(), seed).map_err(|e| CliError::Invalid(e.to_string()))?;
    params.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    if builtin_adversary(adversary, 0).is_none() {
        return Err(CliError::Invalid(format!("unknown adversary {adversary:?}")));
    }
    let results: Vec<(bool, usize, u64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = trial_seed(seed, k);
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(s));
            let secrets: Vec<Fe> = (0..l).map(|_| field.random(&mut rng)).collect();
            let p = SessionParams { seed: s, ..params.clone() };
            match run_improved(&p, &secrets, builtin_adversary(adversary, s).expect("checked")) {
                Ok(o) => (o.delivered == secrets, o.pseudo_basis.len(), o.ledger.total_symbols()),
                Err(_) => (false, 0, 0),
            }
        })
        .collect();
    let (c0, c1) = improved_bound_constants(n, l, q);
    Ok(BenchRow {
        n,
        t,
        q,
        l,
        trials,
        successes: results.iter().filter(|r| r.0).count() as u64,
        w_max: results.iter().map(|r| r.1).max().unwrap_or(0),
        max_symbols: results.iter().map(|r| r.2).max().unwrap_or(0),
        closed_form_ok: results
            .iter()
            .all(|&(ok, w, total)| ok && total == improved_costs(n, t, l, q, w).total()),
        c0,
        c1,
        bound_symbols: improved_bound(n, t, l, q),
        bits_per_symbol: field.bits_per_symbol(),
    })
}

pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for &n in &spec.ns {
        for &rule in &spec.ls {
            rows.push(bench_point(n, rule.eval(n), &spec.adversary, spec.trials, spec.seed)?);
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String, CliError> {
    csv_with_schema(
        "psmt-bench v1",
        &[
            "n", "t", "q", "l", "trials", "successes", "w_max", "max_symbols", "closed_form_ok",
            "c0", "c1", "bound_symbols", "rate", "rate_decimal", "bound_rate", "bound_rate_decimal",
            "bits_per_symbol", "max_bits", "within_bound",
        ],
        |w| {
            for r in rows {
                w.write_record([
                    r.n.to_string(),
                    r.t.to_string(),
                    r.q.to_string(),
                    r.l.to_string(),
                    r.trials.to_string(),
                    r.successes.to_string(),
                    r.w_max.to_string(),
                    r.max_symbols.to_string(),
                    r.closed_form_ok.to_string(),
                    r.c0.to_string(),
                    r.c1.to_string(),
                    r.bound_symbols.to_string(),
                    ratio_string(r.rate()),
                    ratio_decimal(r.rate()),
                    ratio_string(r.bound_rate()),
                    ratio_decimal(r.bound_rate()),
                    r.bits_per_symbol.to_string(),
                    (r.max_symbols * u64::from(r.bits_per_symbol)).to_string(),
                    r.within_bound().to_string(),
                ])?;
            }
            Ok(())
        },
    )
}
