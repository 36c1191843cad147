//! `psmt run`: seeded trials of one protocol against one adversary.

use std::fmt::Write as _;

use log::{debug, warn};
use num_rational::Ratio;
use psmt::channels::{builtin_adversary, CostLedger, Transcript};
use psmt::protocols::{run_basic, run_improved, CodewordSource, SessionParams};
use psmt::rankmetric::{generalized_adversary, run_rank_protocol, GeneralizedMedium, RankParams, RankSetup};
use psmt::Fe;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{csv_with_schema, ratio_decimal, ratio_string, splitmix64, trial_seed, CliError, ProtocolKind, Validated};

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    pub success: bool,
    /// Protocol error, if the run aborted.
    pub error: Option<String>,
    pub ledger: CostLedger,
    pub transcript: Option<Transcript>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub spec: Validated,
    /// Ordered by trial index.
    pub trials: Vec<TrialResult>,
}

/// Runs trial `k` with seed `trial_seed(spec.seed, k)`. The secrets come
/// from a ChaCha8 stream seeded with `splitmix64` of the trial seed; Bob's
/// codewords and the adversary use the trial seed itself.
pub fn run_trial(spec: &Validated, trial: u64, keep_transcript: bool) -> TrialResult {
    let seed = trial_seed(spec.seed, trial);
    let field = &spec.field;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let secrets: Vec<Fe> = (0..spec.l).map(|_| field.random(&mut rng)).collect();
    let outcome = match spec.protocol {
        ProtocolKind::Basic | ProtocolKind::Improved => {
            let params = SessionParams::with_t(spec.n, spec.t, spec.l, field.clone(), seed).expect("validated");
            let adversary = builtin_adversary(&spec.adversary, seed).expect("validated");
            let run = if spec.protocol == ProtocolKind::Basic { run_basic } else { run_improved };
            run(&params, &secrets, adversary).map(|o| (o.delivered, o.ledger, o.transcript))
        }
        ProtocolKind::Rank => {
            let params = RankParams {
                n: spec.n,
                t: spec.t,
                l: spec.l,
                q: spec.q,
                m: spec.m.expect("validated"),
                seed,
            };
            let setup = RankSetup::new(&params).expect("validated");
            let adversary = generalized_adversary(&spec.adversary, spec.n, spec.t, field, seed).expect("validated");
            let mut medium = GeneralizedMedium::new(spec.n, field, adversary);
            run_rank_protocol(&setup, &secrets, &mut medium, &CodewordSource::Random(seed))
                .map(|o| (o.delivered, o.ledger, o.transcript))
        }
    };
    match outcome {
        Ok((delivered, ledger, transcript)) => {
            let success = delivered == secrets;
            if !success {
                warn!("trial {trial} (seed {seed}): delivered secrets differ");
            }
            debug!("trial {trial}: {} symbols", ledger.total_symbols());
            TrialResult {
                trial,
                seed,
                success,
                error: None,
                ledger,
                transcript: keep_transcript.then_some(transcript),
            }
        }
        Err(e) => {
            warn!("trial {trial} (seed {seed}) aborted: {e}");
            TrialResult {
                trial,
                seed,
                success: false,
                error: Some(e.to_string()),
                ledger: CostLedger::default(),
                transcript: None,
            }
        }
    }
}

pub fn run_experiment(spec: &Validated, keep_transcripts: bool) -> RunReport {
    let trials = (0..spec.trials)
        .into_par_iter()
        .map(|k| run_trial(spec, k, keep_transcripts))
        .collect();
    RunReport { spec: spec.clone(), trials }
}

/// Aggregates over all trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub successes: u64,
    pub trials: u64,
    pub mean_symbols: Ratio<u64>,
    pub max_symbols: u64,
    /// Mean symbols per secret symbol.
    pub rate: Ratio<u64>,
    pub max_rate: Ratio<u64>,
    pub bits_per_symbol: u32,
    pub max_bits: u64,
}

impl RunReport {
    pub fn all_succeeded(&self) -> bool {
        self.trials.iter().all(|t| t.success)
    }

    pub fn summary(&self) -> Summary {
        let trials = self.trials.len() as u64;
        let totals: Vec<u64> = self.trials.iter().map(|t| t.ledger.total_symbols()).collect();
        let sum: u64 = totals.iter().sum();
        let max_symbols = totals.iter().copied().max().unwrap_or(0);
        let l = self.spec.l as u64;
        let bits_per_symbol = self.spec.field.bits_per_symbol();
        let mean_symbols = Ratio::new(sum, trials.max(1));
        Summary {
            successes: self.trials.iter().filter(|t| t.success).count() as u64,
            trials,
            mean_symbols,
            max_symbols,
            rate: mean_symbols / l,
            max_rate: Ratio::new(max_symbols, l),
            bits_per_symbol,
            max_bits: max_symbols * u64::from(bits_per_symbol),
        }
    }

    pub fn summary_csv(&self) -> Result<String, CliError> {
        let s = self.summary();
        let spec = &self.spec;
        let success_rate = Ratio::new(s.successes, s.trials.max(1));
        csv_with_schema(
            "psmt-summary v1",
            &[
                "protocol", "n", "t", "l", "q", "m", "adversary", "seed", "trials", "successes",
                "success_rate", "success_rate_decimal", "mean_symbols", "max_symbols", "rate",
                "rate_decimal", "max_rate", "max_rate_decimal", "bits_per_symbol", "max_bits",
            ],
            |w| {
                w.write_record([
                    spec.protocol.to_string(),
                    spec.n.to_string(),
                    spec.t.to_string(),
                    spec.l.to_string(),
                    spec.q.to_string(),
                    spec.m.map(|m| m.to_string()).unwrap_or_default(),
                    spec.adversary.clone(),
                    spec.seed.to_string(),
                    s.trials.to_string(),
                    s.successes.to_string(),
                    ratio_string(success_rate),
                    ratio_decimal(success_rate),
                    ratio_string(s.mean_symbols),
                    s.max_symbols.to_string(),
                    ratio_string(s.rate),
                    ratio_decimal(s.rate),
                    ratio_string(s.max_rate),
                    ratio_decimal(s.max_rate),
                    s.bits_per_symbol.to_string(),
                    s.max_bits.to_string(),
                ])
            },
        )
    }

    /// One row per phase and direction per trial.
    pub fn phases_csv(&self) -> Result<String, CliError> {
        csv_with_schema(
            "psmt-phases v1",
            &["trial", "seed", "success", "phase", "direction", "symbols", "bits"],
            |w| {
                for t in &self.trials {
                    for e in &t.ledger.entries {
                        w.write_record([
                            t.trial.to_string(),
                            t.seed.to_string(),
                            t.success.to_string(),
                            e.phase.clone(),
                            e.direction.label().to_string(),
                            e.symbols.to_string(),
                            (e.symbols * u64::from(t.ledger.bits_per_symbol)).to_string(),
                        ])?;
                    }
                }
                Ok(())
            },
        )
    }

    /// Each trial's transcript as JSON lines, preceded by a
    /// `{"trial": k, "seed": s}` line.
    pub fn transcript_log(&self) -> String {
        let mut out = String::new();
        for t in &self.trials {
            writeln!(out, "{}", serde_trial_header(t.trial, t.seed)).expect("writing to a String");
            if let Some(tr) = &t.transcript {
                out.push_str(&tr.to_jsonl(&self.spec.field));
            }
        }
        out
    }
}

fn serde_trial_header(trial: u64, seed: u64) -> String {
    format!("{{\"trial\":{trial},\"seed\":{seed}}}")
}
