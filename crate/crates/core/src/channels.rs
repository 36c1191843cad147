//! Simulated `n`-channel medium with a static adversary, full transcript
//! capture, Eve's view and symbol-exact cost accounting.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::gf::{Fe, Field};

/// Stable phase labels used in transcripts and ledgers.
pub mod phase {
    pub const ROUND1: &str = "round1";
    pub const PSEUDO_BASIS: &str = "pseudo-basis";
    pub const PB_OVERHEAD: &str = "pb-overhead";
    pub const MASKED_SECRETS: &str = "masked-secrets";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    BobToAlice,
    AliceToBob,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::BobToAlice => "bob-to-alice",
            Direction::AliceToBob => "alice-to-bob",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("adversary wrote to honest channel {0}")]
    HonestChannel(usize),
    #[error("adversary chose {chosen} channels, bound is t = {t} of n = {n}")]
    TooManyCorrupted { chosen: usize, t: usize, n: usize },
    #[error("array {array} has length {got}, expected {n}")]
    ArrayLength { array: usize, got: usize, n: usize },
    #[error("rewrite refers to array {0}, which was not sent")]
    NoSuchArray(usize),
    #[error("symbol {0} is not an element of the channel field")]
    ForeignSymbol(u32),
}

/// One call to [`Medium::transmit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub direction: Direction,
    pub phase: &'static str,
    pub sent: Vec<Vec<Fe>>,
    pub delivered: Vec<Vec<Fe>>,
    /// What Eve reads from each array.
    pub eve_observed: Vec<Vec<Fe>>,
    /// Broadcast payload, visible to Eve in full.
    pub public: Option<Vec<Fe>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub n: usize,
    pub bits_per_symbol: u32,
    pub records: Vec<Record>,
}

impl Transcript {
    pub fn new(n: usize, field: &Field) -> Self {
        Transcript {
            n,
            bits_per_symbol: field.bits_per_symbol(),
            records: Vec::new(),
        }
    }

    /// Exactly one leading Bob-to-Alice block followed only by Alice-to-Bob
    /// records.
    pub fn is_two_round(&self) -> bool {
        let switch = self
            .records
            .iter()
            .position(|r| r.direction == Direction::AliceToBob)
            .unwrap_or(self.records.len());
        switch > 0
            && self.records[..switch]
                .iter()
                .all(|r| r.direction == Direction::BobToAlice)
            && self.records[switch..]
                .iter()
                .all(|r| r.direction == Direction::AliceToBob)
    }

    /// One JSON object per record.
    pub fn to_jsonl(&self, field: &Field) -> String {
        let arrays = |a: &[Vec<Fe>]| -> serde_json::Value {
            a.iter()
                .map(|row| row.iter().map(|&s| field.symbol_json(s)).collect::<Vec<_>>())
                .collect()
        };
        let mut out = String::new();
        for r in &self.records {
            let public = r
                .public
                .as_ref()
                .map(|p| p.iter().map(|&s| field.symbol_json(s)).collect::<Vec<_>>());
            let line = json!({
                "direction": r.direction.label(),
                "phase": r.phase,
                "sent": arrays(&r.sent),
                "delivered": arrays(&r.delivered),
                "eve": arrays(&r.eve_observed),
                "public": public,
            });
            writeln!(out, "{line}").expect("writing to a String");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EveRecord {
    pub direction: Direction,
    pub phase: &'static str,
    pub observed: Vec<Vec<Fe>>,
    pub public: Option<Vec<Fe>>,
}

/// Everything Eve has seen so far. This is the only session data handed to
/// adversaries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EveView {
    pub records: Vec<EveRecord>,
}

impl EveView {
    /// Flat integer encoding, used as a key when comparing view
    /// distributions.
    pub fn key(&self) -> Vec<u32> {
        let mut k = Vec::new();
        for r in &self.records {
            k.push(r.direction as u32);
            k.push(r.observed.len() as u32);
            for a in &r.observed {
                k.push(a.len() as u32);
                k.extend(a.iter().map(|s| s.0));
            }
            match &r.public {
                Some(p) => {
                    k.push(p.len() as u32);
                    k.extend(p.iter().map(|s| s.0));
                }
                None => k.push(u32::MAX),
            }
        }
        k
    }
}

/// A point-to-point transport between Alice and Bob.
pub trait Medium {
    fn n(&self) -> usize;
    fn field(&self) -> &Field;
    fn transmit(
        &mut self,
        direction: Direction,
        phase: &'static str,
        arrays: Vec<Vec<Fe>>,
        public: Option<Vec<Fe>>,
    ) -> Result<Vec<Vec<Fe>>, ChannelError>;
    fn transcript(&self) -> &Transcript;
    fn eve_view(&self) -> &EveView;
}

pub(crate) fn check_arrays(arrays: &[Vec<Fe>], n: usize, field: &Field) -> Result<(), ChannelError> {
    for (i, a) in arrays.iter().enumerate() {
        if a.len() != n {
            return Err(ChannelError::ArrayLength {
                array: i,
                got: a.len(),
                n,
            });
        }
        if let Some(s) = a.iter().find(|s| !field.contains(**s)) {
            return Err(ChannelError::ForeignSymbol(s.0));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rewrite {
    pub array: usize,
    pub channel: usize,
    pub value: Fe,
}

pub struct TamperContext<'a> {
    pub direction: Direction,
    pub phase: &'static str,
    /// Number of earlier transmissions in the session.
    pub transmission: usize,
    /// Corrupted channels in ascending order.
    pub corrupted: &'a [usize],
    /// `observed[a][i]` is the symbol of array `a` on `corrupted[i]`.
    pub observed: &'a [Vec<Fe>],
}

/// A static adversary on the classical medium.
pub trait Adversary {
    fn name(&self) -> &str;
    /// Called once, before the first transmission.
    fn choose_channels(&mut self, n: usize, t: usize) -> BTreeSet<usize>;
    /// `view` holds the earlier transmissions only.
    fn tamper(&mut self, field: &Field, ctx: &TamperContext<'_>, view: &EveView) -> Vec<Rewrite>;
}

/// The fixed corrupted set and `n`, `t` of a classical session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelBundle {
    pub n: usize,
    pub t: usize,
    pub corrupted: BTreeSet<usize>,
    pub field: Field,
}

pub struct ChannelMedium {
    bundle: ChannelBundle,
    corrupted: Vec<usize>,
    adversary: Box<dyn Adversary + Send>,
    transcript: Transcript,
    view: EveView,
}

impl ChannelMedium {
    pub fn new(
        n: usize,
        t: usize,
        field: &Field,
        mut adversary: Box<dyn Adversary + Send>,
    ) -> Result<Self, ChannelError> {
        let corrupted = adversary.choose_channels(n, t);
        if corrupted.len() > t || corrupted.iter().any(|&c| c >= n) {
            return Err(ChannelError::TooManyCorrupted {
                chosen: corrupted.len(),
                t,
                n,
            });
        }
        Ok(ChannelMedium {
            corrupted: corrupted.iter().copied().collect(),
            bundle: ChannelBundle {
                n,
                t,
                corrupted,
                field: field.clone(),
            },
            adversary,
            transcript: Transcript::new(n, field),
            view: EveView::default(),
        })
    }

    pub fn bundle(&self) -> &ChannelBundle {
        &self.bundle
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

impl Medium for ChannelMedium {
    fn n(&self) -> usize {
        self.bundle.n
    }

    fn field(&self) -> &Field {
        &self.bundle.field
    }

    fn transmit(
        &mut self,
        direction: Direction,
        phase: &'static str,
        arrays: Vec<Vec<Fe>>,
        public: Option<Vec<Fe>>,
    ) -> Result<Vec<Vec<Fe>>, ChannelError> {
        let field = &self.bundle.field;
        check_arrays(&arrays, self.bundle.n, field)?;
        let observed: Vec<Vec<Fe>> = arrays
            .iter()
            .map(|a| self.corrupted.iter().map(|&c| a[c]).collect())
            .collect();
        let ctx = TamperContext {
            direction,
            phase,
            transmission: self.transcript.records.len(),
            corrupted: &self.corrupted,
            observed: &observed,
        };
        let rewrites = self.adversary.tamper(field, &ctx, &self.view);
        let mut delivered = arrays.clone();
        for rw in rewrites {
            if !self.bundle.corrupted.contains(&rw.channel) {
                return Err(ChannelError::HonestChannel(rw.channel));
            }
            if !field.contains(rw.value) {
                return Err(ChannelError::ForeignSymbol(rw.value.0));
            }
            let a = delivered
                .get_mut(rw.array)
                .ok_or(ChannelError::NoSuchArray(rw.array))?;
            a[rw.channel] = rw.value;
        }
        for (s, d) in arrays.iter().zip(&delivered) {
            for j in 0..self.bundle.n {
                assert!(
                    s[j] == d[j] || self.bundle.corrupted.contains(&j),
                    "honest channel {j} altered"
                );
            }
        }
        self.view.records.push(EveRecord {
            direction,
            phase,
            observed: observed.clone(),
            public: public.clone(),
        });
        self.transcript.records.push(Record {
            direction,
            phase,
            sent: arrays,
            delivered: delivered.clone(),
            eve_observed: observed,
            public,
        });
        Ok(delivered)
    }

    fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    fn eve_view(&self) -> &EveView {
        &self.view
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub phase: String,
    pub direction: Direction,
    pub symbols: u64,
}

/// Symbol counts per `(phase, direction)`, in order of first use.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CostLedger {
    pub bits_per_symbol: u32,
    pub entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn add(&mut self, phase: &str, direction: Direction, symbols: u64) {
        match self
            .entries
            .iter_mut()
            .find(|e| e.phase == phase && e.direction == direction)
        {
            Some(e) => e.symbols += symbols,
            None => self.entries.push(LedgerEntry {
                phase: phase.to_string(),
                direction,
                symbols,
            }),
        }
    }

    pub fn phase_symbols(&self, phase: &str) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.phase == phase)
            .map(|e| e.symbols)
            .sum()
    }

    pub fn direction_symbols(&self, direction: Direction) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.direction == direction)
            .map(|e| e.symbols)
            .sum()
    }

    pub fn total_symbols(&self) -> u64 {
        self.entries.iter().map(|e| e.symbols).sum()
    }

    pub fn total_bits(&self) -> u64 {
        self.total_symbols() * u64::from(self.bits_per_symbol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# psmt-ledger v1\nphase,direction,symbols,bits\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{}",
                e.phase,
                e.direction.label(),
                e.symbols,
                e.symbols * u64::from(self.bits_per_symbol)
            )
            .expect("writing to a String");
        }
        out
    }
}

pub fn cost_report(transcript: &Transcript) -> CostLedger {
    let mut ledger = CostLedger {
        bits_per_symbol: transcript.bits_per_symbol,
        entries: Vec::new(),
    };
    for r in &transcript.records {
        let symbols: usize = r.sent.iter().map(Vec::len).sum();
        ledger.add(r.phase, r.direction, symbols as u64);
    }
    ledger
}

pub const BUILTIN_ADVERSARIES: &[&str] = &[
    "passive",
    "random-noise",
    "targeted-syndrome",
    "replay",
    "sparse",
];

/// Builds a catalogue adversary; `None` for an unknown name.
pub fn builtin_adversary(name: &str, seed: u64) -> Option<Box<dyn Adversary + Send>> {
    let kind = match name {
        "passive" => Kind::Passive,
        "random-noise" => Kind::RandomNoise,
        "targeted-syndrome" => Kind::Targeted,
        "replay" => Kind::Replay,
        "sparse" => Kind::Sparse,
        _ => return None,
    };
    Some(Box::new(Builtin {
        kind,
        name: name.to_string(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Passive,
    RandomNoise,
    Targeted,
    Replay,
    Sparse,
}

struct Builtin {
    kind: Kind,
    name: String,
    rng: ChaCha8Rng,
}

impl Builtin {
    fn random_rewrites(&mut self, field: &Field, ctx: &TamperContext<'_>) -> Vec<Rewrite> {
        let mut out = Vec::new();
        for array in 0..ctx.observed.len() {
            for &channel in ctx.corrupted {
                out.push(Rewrite {
                    array,
                    channel,
                    value: field.random(&mut self.rng),
                });
            }
        }
        out
    }
}

impl Adversary for Builtin {
    fn name(&self) -> &str {
        &self.name
    }

    fn choose_channels(&mut self, n: usize, t: usize) -> BTreeSet<usize> {
        let size = match self.kind {
            Kind::Sparse => t.saturating_sub(1) / 2,
            _ => t,
        };
        sample(&mut self.rng, n, size.min(n)).into_iter().collect()
    }

    fn tamper(&mut self, field: &Field, ctx: &TamperContext<'_>, view: &EveView) -> Vec<Rewrite> {
        let first = ctx.transmission == 0;
        match self.kind {
            Kind::Passive => Vec::new(),
            Kind::RandomNoise => self.random_rewrites(field, ctx),
            Kind::Targeted if first => {
                let mut out = Vec::new();
                for (array, obs) in ctx.observed.iter().enumerate() {
                    if array < ctx.corrupted.len() {
                        out.push(Rewrite {
                            array,
                            channel: ctx.corrupted[array],
                            value: field.add(obs[array], Fe::ONE),
                        });
                    } else {
                        for &channel in ctx.corrupted {
                            out.push(Rewrite {
                                array,
                                channel,
                                value: field.random(&mut self.rng),
                            });
                        }
                    }
                }
                out
            }
            Kind::Sparse if first => {
                let k = ctx.corrupted.len();
                if k == 0 {
                    return Vec::new();
                }
                ctx.observed
                    .iter()
                    .enumerate()
                    .map(|(array, obs)| {
                        let i = array % k;
                        Rewrite {
                            array,
                            channel: ctx.corrupted[i],
                            value: field.add(obs[i], field.random_nonzero(&mut self.rng)),
                        }
                    })
                    .collect()
            }
            Kind::Targeted | Kind::Sparse => self.random_rewrites(field, ctx),
            Kind::Replay if first => {
                let mut out = Vec::new();
                for array in 1..ctx.observed.len() {
                    for (i, &channel) in ctx.corrupted.iter().enumerate() {
                        out.push(Rewrite {
                            array,
                            channel,
                            value: ctx.observed[array - 1][i],
                        });
                    }
                }
                out
            }
            Kind::Replay => {
                let Some(round1) = view.records.first().filter(|r| !r.observed.is_empty()) else {
                    return Vec::new();
                };
                let mut out = Vec::new();
                for array in 0..ctx.observed.len() {
                    let old = &round1.observed[array % round1.observed.len()];
                    for (i, &channel) in ctx.corrupted.iter().enumerate() {
                        out.push(Rewrite {
                            array,
                            channel,
                            value: old[i],
                        });
                    }
                }
                out
            }
        }
    }
}

/// An adversary on a caller-chosen channel set driven by a closure.
pub struct FixedSetAdversary<F> {
    pub channels: BTreeSet<usize>,
    pub rewrite: F,
}

impl<F> Adversary for FixedSetAdversary<F>
where
    F: FnMut(&Field, &TamperContext<'_>, &EveView) -> Vec<Rewrite>,
{
    fn name(&self) -> &str {
        "fixed-set"
    }

    fn choose_channels(&mut self, _n: usize, _t: usize) -> BTreeSet<usize> {
        self.channels.clone()
    }

    fn tamper(&mut self, field: &Field, ctx: &TamperContext<'_>, view: &EveView) -> Vec<Rewrite> {
        (self.rewrite)(field, ctx, view)
    }
}
