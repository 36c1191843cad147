//! `psmt audit`: exhaustive privacy audits at enumerable sizes.

use std::fmt::Write as _;

use psmt::channels::BUILTIN_ADVERSARIES;
use psmt::protocols::{privacy_audit, AuditError, AuditProtocol, AuditReport, AuditVerdict};
use psmt::rankmetric::{rank_privacy_audit, RankParams, GENERALIZED_ADVERSARIES};
use psmt::Field;

use crate::{canonical_adversary, CliError, ProtocolKind};

pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone)]
pub struct AuditSpec {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub t: Option<usize>,
    pub q: Option<u64>,
    pub m: Option<u32>,
    /// `None` audits every built-in adversary of the protocol.
    pub adversary: Option<String>,
    pub seed: u64,
    pub budget: u64,
}

#[derive(Debug)]
pub struct AuditOutcome {
    pub adversary: String,
    pub result: Result<AuditReport, AuditError>,
}

impl AuditOutcome {
    pub fn passed(&self) -> bool {
        matches!(&self.result, Ok(r) if r.verdict == AuditVerdict::Pass)
    }
}

pub fn run_audit(spec: &AuditSpec) -> Result<Vec<AuditOutcome>, CliError> {
    let n = spec.n;
    let t = spec.t.unwrap_or(n.saturating_sub(1) / 2);
    if t == 0 || n != 2 * t + 1 {
        return Err(CliError::Invalid(format!("n must equal 2t+1 with t >= 1 (n = {n}, t = {t})")));
    }
    let names: Vec<String> = match &spec.adversary {
        Some(a) => vec![canonical_adversary(spec.protocol, a)
            .ok_or_else(|| CliError::Invalid(format!("unknown adversary {a:?}")))?
            .to_string()],
        None if spec.protocol == ProtocolKind::Rank => GENERALIZED_ADVERSARIES.iter().map(|s| s.to_string()).collect(),
        None => BUILTIN_ADVERSARIES.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = Vec::new();
    for name in names {
        let result = match spec.protocol {
            ProtocolKind::Rank => {
                let params = RankParams {
                    n,
                    t,
                    l: 1,
                    q: spec.q.unwrap_or(2),
                    m: spec.m.unwrap_or(n as u32 + 1),
                    seed: spec.seed,
                };
                rank_privacy_audit(&params, &name, spec.budget)
            }
            kind => {
                let field = match spec.q {
                    Some(q) => Field::with_order(q).map_err(|e| CliError::Invalid(e.to_string()))?,
                    None => Field::smallest_prime_above(n as u64),
                };
                let protocol = if kind == ProtocolKind::Basic {
                    AuditProtocol::Basic
                } else {
                    AuditProtocol::Improved
                };
                privacy_audit(protocol, n, t, &field, &name, spec.seed, spec.budget)
            }
        };
        out.push(AuditOutcome { adversary: name, result });
    }
    Ok(out)
}

/// One line per adversary; failures dump the distinguishing view.
pub fn format_audit(spec: &AuditSpec, outcomes: &[AuditOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        let head = format!("audit {} n={} adversary={}", spec.protocol, spec.n, o.adversary);
        let line = match &o.result {
            Ok(r) => match &r.verdict {
                AuditVerdict::Pass => format!("{head}: PASS ({} runs, {} distinct views)", r.runs, r.distinct_views),
                AuditVerdict::Fail { secret, reference, view, count, reference_count } => format!(
                    "{head}: FAIL view {view:?} occurs {count} times for secret {} and {reference_count} times for secret {}",
                    secret.0, reference.0
                ),
            },
            Err(e @ AuditError::BudgetExceeded { .. }) => format!("{head}: REFUSED {e}"),
            Err(e) => format!("{head}: ERROR {e}"),
        };
        writeln!(s, "{line}").expect("writing to a String");
    }
    s
}

/// 0 if every audit passed, 2 if any was refused, 1 otherwise.
pub fn audit_exit_code(outcomes: &[AuditOutcome]) -> u8 {
    if outcomes.iter().all(AuditOutcome::passed) {
        0
    } else if outcomes
        .iter()
        .any(|o| matches!(o.result, Err(AuditError::BudgetExceeded { .. } | AuditError::Setup(_))))
    {
        2
    } else {
        1
    }
}
