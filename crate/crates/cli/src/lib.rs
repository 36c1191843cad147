//! Experiment driver behind the `psmt` binary: seeded protocol runs with
//! CSV cost reports, exhaustive privacy audits and rate benchmarks.

pub mod audit;
pub mod bench;
pub mod run;

use std::fmt;

use num_rational::Ratio;
use psmt::channels::BUILTIN_ADVERSARIES;
use psmt::protocols::SessionParams;
use psmt::rankmetric::{RankParams, GENERALIZED_ADVERSARIES};
use psmt::Field;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProtocolKind {
    Basic,
    Improved,
    Rank,
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::Basic => "basic",
            ProtocolKind::Improved => "improved",
            ProtocolKind::Rank => "rank",
        })
    }
}

/// Experiment parameters as given on the command line.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub t: Option<usize>,
    pub l: usize,
    pub q: Option<u64>,
    pub m: Option<u32>,
    pub adversary: String,
    pub trials: u64,
    pub seed: u64,
}

/// A spec with defaults filled in and every constraint checked.
#[derive(Debug, Clone)]
pub struct Validated {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub t: usize,
    pub l: usize,
    /// Symbol field: `F_q` for the classical protocols, `F_{q^m}` for rank.
    pub field: Field,
    pub q: u64,
    pub m: Option<u32>,
    pub adversary: String,
    pub trials: u64,
    pub seed: u64,
}

/// Short adversary names accepted in addition to the canonical ones.
fn canonical_adversary(protocol: ProtocolKind, name: &str) -> Option<&'static str> {
    let (names, alias): (&[&'static str], Option<&'static str>) = match protocol {
        ProtocolKind::Rank => (GENERALIZED_ADVERSARIES, None),
        _ => (
            BUILTIN_ADVERSARIES,
            match name {
                "targeted" => Some("targeted-syndrome"),
                "random" => Some("random-noise"),
                _ => None,
            },
        ),
    };
    alias.or_else(|| names.iter().copied().find(|&n| n == name))
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<Validated, CliError> {
        let invalid = |m: String| CliError::Invalid(m);
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1".into()));
        }
        let n = self.n;
        let t = self.t.unwrap_or(n.saturating_sub(1) / 2);
        if t == 0 || n != 2 * t + 1 {
            return Err(invalid(format!("n must equal 2t+1 with t >= 1 (n = {n}, t = {t})")));
        }
        let adversary = canonical_adversary(self.protocol, &self.adversary)
            .ok_or_else(|| invalid(format!("unknown adversary {:?} for the {} protocol", self.adversary, self.protocol)))?
            .to_string();
        match self.protocol {
            ProtocolKind::Rank => {
                let q = self.q.unwrap_or(2);
                let m = self.m.unwrap_or(n as u32 + 1);
                let params = RankParams { n, t, l: self.l, q, m, seed: self.seed };
                let setup = psmt::rankmetric::RankSetup::new(&params).map_err(|e| invalid(e.to_string()))?;
                Ok(Validated {
                    protocol: self.protocol,
                    n,
                    t,
                    l: self.l,
                    field: setup.field,
                    q,
                    m: Some(m),
                    adversary,
                    trials: self.trials,
                    seed: self.seed,
                })
            }
            _ => {
                if self.m.is_some() {
                    return Err(invalid("--m applies to the rank protocol only".into()));
                }
                let field = match self.q {
                    Some(q) => Field::with_order(q).map_err(|e| invalid(e.to_string()))?,
                    None => Field::smallest_prime_above(n as u64),
                };
                SessionParams::with_t(n, t, self.l, field.clone(), self.seed)
                    .and_then(|p| p.validate().map(|_| p))
                    .map_err(|e| invalid(e.to_string()))?;
                Ok(Validated {
                    protocol: self.protocol,
                    n,
                    t,
                    l: self.l,
                    q: field.order() as u64,
                    field,
                    m: None,
                    adversary,
                    trials: self.trials,
                    seed: self.seed,
                })
            }
        }
    }
}

/// One step of the SplitMix64 generator.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `k`: `splitmix64(seed + k * 0x9E3779B97F4A7C15)`, so any
/// trial can be rerun on its own.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// `"p/q"` in lowest terms; integers keep the `/1`.
pub fn ratio_string(r: Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio_decimal(r: Ratio<u64>) -> String {
    format!("{:.6}", *r.numer() as f64 / *r.denom() as f64)
}

/// CSV text with a leading `# <schema>` line.
pub(crate) fn csv_with_schema<F>(schema: &str, header: &[&str], fill: F) -> Result<String, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(format!("# {schema}\n{}", String::from_utf8(body).expect("csv output is utf-8")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> ExperimentSpec {
        ExperimentSpec {
            protocol: ProtocolKind::Basic,
            n,
            t: None,
            l: 1,
            q: None,
            m: None,
            adversary: "passive".into(),
            trials: 1,
            seed: 0,
        }
    }

    #[test]
    fn validation() {
        let v = spec(5).validate().unwrap();
        assert_eq!((v.t, v.q), (2, 7));
        let err = spec(6).validate().unwrap_err();
        assert!(err.to_string().contains("n must equal 2t+1"));
        assert_eq!(err.exit_code(), 2);
        let mut s = spec(5);
        s.q = Some(5);
        assert!(s.validate().is_err());
        s.q = Some(8);
        assert_eq!(s.validate().unwrap().q, 8);
        s.adversary = "targeted".into();
        assert_eq!(s.validate().unwrap().adversary, "targeted-syndrome");
        s.protocol = ProtocolKind::Rank;
        s.adversary = "weight-two".into();
        assert!(s.validate().is_err());
        s.q = None;
        s.n = 3;
        let v = s.validate().unwrap();
        assert_eq!((v.field.order(), v.m), (16, Some(4)));
    }

    #[test]
    fn seeds() {
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_ne!(trial_seed(1, 0), trial_seed(1, 1));
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
    }

    #[test]
    fn ratios() {
        assert_eq!(ratio_string(Ratio::new(10, 4)), "5/2");
        assert_eq!(ratio_string(Ratio::new(10, 5)), "2/1");
        assert_eq!(ratio_decimal(Ratio::new(1, 3)), "0.333333");
    }
}
