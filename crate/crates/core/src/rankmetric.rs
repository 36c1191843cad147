//! Rank-metric variant: Gabidulin codes over `F_{q^m}`, an adversary that
//! eavesdrops `t` fixed `F_q`-combinations of the channels and injects
//! errors `sum Δ^(i) ⊗ μ^(i)`, and the two-round protocol built on them.
//!
//! The base field must be prime (`q = p`); the symbol field is `F_{p^m}` in
//! its polynomial basis, so the `F_q` scalars are the indices `0..p`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channels::{
    check_arrays, cost_report, phase, Adversary, ChannelError, CostLedger, Direction, EveRecord,
    EveView, Medium, Record, Rewrite, TamperContext, Transcript,
};
use crate::gf::{is_prime, Fe, Field, FieldError};
use crate::linalg::{self, Matrix};
use crate::mds::{CodeError, LinearCode, Word};
use crate::protocols::{
    audit_distributions, check_budget, index_digits, tuple_codewords, AuditError, AuditReport, CodewordSource, ProtocolError,
};
use crate::pseudobasis::{self, PseudoBasis};

/// Largest symbol field the brute-force broadcast decoder accepts.
pub const MAX_BROADCAST_FIELD: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("base field order {0} must be prime")]
    BaseNotPrime(u64),
    #[error("extension degree {m} is below the required {needed}")]
    ExtensionTooSmall { m: u32, needed: usize },
    #[error("evaluation points are linearly dependent over the base field")]
    DependentPoints,
    #[error("symbol field of order {0} is too large for brute-force broadcast decoding")]
    FieldTooLarge(u64),
    #[error("threshold t = {t} needs n >= 2t+1, got n = {n}")]
    ThresholdTooLarge { t: usize, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Rank over `F_p` of the `m x n` matrix whose columns are the coefficient
/// vectors of the symbols of `w`.
pub fn rank_of(field: &Field, w: &[Fe]) -> usize {
    if field.characteristic() == 2 {
        // Canonical indices are the coefficient bit vectors.
        let mut basis = [0u32; 32];
        let mut rank = 0;
        for s in w {
            let mut v = s.0;
            while v != 0 {
                let hb = 31 - v.leading_zeros() as usize;
                if basis[hb] == 0 {
                    basis[hb] = v;
                    rank += 1;
                    break;
                }
                v ^= basis[hb];
            }
        }
        return rank;
    }
    let base = Field::prime(field.characteristic() as u64).expect("characteristic is prime");
    let rows: Vec<Vec<Fe>> = w
        .iter()
        .map(|&s| field.coefficients(s).into_iter().map(Fe).collect())
        .collect();
    linalg::rank(&base, &rows)
}

pub fn rank_distance(field: &Field, a: &[Fe], b: &[Fe]) -> usize {
    rank_of(field, &field.sub_vec(a, b))
}

/// `[n, k, n-k+1]` Gabidulin code with generator rows `g_j^(q^i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GabidulinCode {
    field: Field,
    points: Vec<Fe>,
    k: usize,
    generator: Matrix,
    parity_check: Matrix,
}

impl GabidulinCode {
    /// Evaluation points are `1, x, ..., x^(n-1)`.
    pub fn new(n: usize, k: usize, q: u64, m: u32) -> Result<Self, RankError> {
        if !is_prime(q) {
            return Err(RankError::BaseNotPrime(q));
        }
        if (m as usize) < n {
            return Err(RankError::ExtensionTooSmall { m, needed: n });
        }
        let field = Field::extension_of_degree(q, m)?;
        let points = (0..n).map(|j| Fe((q as u32).pow(j as u32))).collect();
        Self::with_points(points, k, &field)
    }

    pub fn with_points(points: Vec<Fe>, k: usize, field: &Field) -> Result<Self, RankError> {
        let n = points.len();
        if k == 0 || k > n {
            return Err(CodeError::DimensionOutOfRange { k, n }.into());
        }
        if rank_of(field, &points) != n {
            return Err(RankError::DependentPoints);
        }
        let generator: Matrix = (0..k)
            .map(|i| points.iter().map(|&g| field.frobenius(g, i as u32)).collect())
            .collect();
        let parity_check = linalg::null_space(field, &generator, n);
        Ok(GabidulinCode {
            field: field.clone(),
            points,
            k,
            generator,
            parity_check,
        })
    }

    pub fn points(&self) -> &[Fe] {
        &self.points
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn min_rank_distance(&self) -> usize {
        self.points.len() - self.k + 1
    }

    /// Keeps the coordinates in `keep`, in that order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self, RankError> {
        let points = keep.iter().map(|&j| self.points[j]).collect();
        Self::with_points(points, self.k, &self.field)
    }

    pub fn encode(&self, message: &[Fe]) -> Result<Word, CodeError> {
        if message.len() != self.k {
            return Err(CodeError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        let mut out = vec![Fe::ZERO; self.points.len()];
        for (&c, row) in message.iter().zip(&self.generator) {
            self.field.axpy(&mut out, c, row);
        }
        Ok(out)
    }

    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Word {
        let msg: Vec<Fe> = (0..self.k).map(|_| self.field.random(rng)).collect();
        self.encode(&msg).expect("message has length k")
    }

    pub fn is_codeword(&self, w: &[Fe]) -> bool {
        self.syndrome(w).is_ok_and(|s| s.iter().all(|x| x.is_zero()))
    }
}

impl LinearCode for GabidulinCode {
    fn field(&self) -> &Field {
        &self.field
    }

    fn length(&self) -> usize {
        self.points.len()
    }

    fn dimension(&self) -> usize {
        self.k
    }

    fn parity_check(&self) -> &Matrix {
        &self.parity_check
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMask {
    pub h: Vec<Fe>,
    pub alpha: Fe,
    pub parent: GabidulinCode,
}

impl RankMask {
    pub fn mask(&self, field: &Field, w: &[Fe]) -> Fe {
        field.dot(&self.h, w)
    }
}

/// `[n, t+1]` Gabidulin code, the puncturing of an `[n+1, t+1]` parent, with
/// `h` taken from the first parent parity row whose last entry is nonzero.
pub fn rank_privacy_pair(
    n: usize,
    t: usize,
    q: u64,
    m: u32,
) -> Result<(GabidulinCode, RankMask), RankError> {
    if t >= n {
        return Err(CodeError::ThresholdTooLarge { t, n }.into());
    }
    if (m as usize) < n + 1 {
        return Err(RankError::ExtensionTooSmall { m, needed: n + 1 });
    }
    let parent = GabidulinCode::new(n + 1, t + 1, q, m)?;
    let row = parent
        .parity_check()
        .iter()
        .find(|row| !row[n].is_zero())
        .expect("parent rank distance exceeds 1")
        .clone();
    let keep: Vec<usize> = (0..n).collect();
    let code = parent.restrict(&keep)?;
    Ok((
        code,
        RankMask {
            h: row[..n].to_vec(),
            alpha: row[n],
            parent,
        },
    ))
}

/// Reliable transmission of single symbols with the `[n, 1, n]` code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankBroadcast {
    code: GabidulinCode,
}

impl RankBroadcast {
    pub fn new(n: usize, q: u64, m: u32) -> Result<Self, RankError> {
        let order = (q as u128).pow(m);
        if order > MAX_BROADCAST_FIELD as u128 {
            return Err(RankError::FieldTooLarge(order.min(u64::MAX as u128) as u64));
        }
        Ok(RankBroadcast {
            code: GabidulinCode::new(n, 1, q, m)?,
        })
    }

    pub fn code(&self) -> &GabidulinCode {
        &self.code
    }

    pub fn encode(&self, symbol: Fe) -> Word {
        self.code.encode(&[symbol]).expect("dimension one")
    }

    /// The symbol whose codeword is closest in rank distance, if that
    /// distance is at most `(n-1)/2`.
    pub fn decode(&self, y: &[Fe]) -> Option<Fe> {
        let field = &self.code.field;
        let g = &self.code.generator[0];
        let radius = (self.code.length() - 1) / 2;
        let mut diff = vec![Fe::ZERO; y.len()];
        for alpha in field.elements() {
            for ((d, &yj), &gj) in diff.iter_mut().zip(y).zip(g) {
                *d = field.sub(yj, field.mul(alpha, gj));
            }
            if rank_of(field, &diff) <= radius {
                return Some(alpha);
            }
        }
        None
    }
}

/// Context handed to a [`DeltaStrategy`] for one transmission.
pub struct DeltaContext<'a> {
    pub direction: Direction,
    pub phase: &'static str,
    pub transmission: usize,
    /// `observed[a][i]` is `λ^(i) · x` for array `a`.
    pub observed: &'a [Vec<Fe>],
    /// Number of tampering vectors.
    pub vectors: usize,
}

/// Chooses the per-array columns `Δ^(1..t)`.
pub trait DeltaStrategy {
    fn name(&self) -> &str;
    /// One vector of `ctx.vectors` elements per array.
    fn deltas(&mut self, field: &Field, ctx: &DeltaContext<'_>, view: &EveView) -> Vec<Vec<Fe>>;
}

/// Eavesdropping vectors `λ`, tampering vectors `μ` (fixed for the
/// session) and a strategy for the `Δ`s.
pub struct GeneralizedAdversary {
    lambda: Vec<Vec<Fe>>,
    mu: Vec<Vec<Fe>>,
    strategy: Box<dyn DeltaStrategy + Send>,
}

impl GeneralizedAdversary {
    pub fn new(
        lambda: Vec<Vec<Fe>>,
        mu: Vec<Vec<Fe>>,
        strategy: Box<dyn DeltaStrategy + Send>,
        n: usize,
        t: usize,
        field: &Field,
    ) -> Result<Self, RankError> {
        let p = field.characteristic();
        let ok = |vs: &[Vec<Fe>]| vs.len() <= t && vs.iter().all(|v| v.len() == n && v.iter().all(|x| x.0 < p));
        if !ok(&lambda) || !ok(&mu) {
            return Err(RankError::InvalidParams(format!(
                "need at most t = {t} vectors of length {n} over the base field"
            )));
        }
        Ok(GeneralizedAdversary { lambda, mu, strategy })
    }

    /// `λ^(i) = μ^(i) =` the unit vector of `channels[i]`.
    pub fn classical(
        channels: &BTreeSet<usize>,
        strategy: Box<dyn DeltaStrategy + Send>,
        n: usize,
        field: &Field,
    ) -> Result<Self, RankError> {
        let units: Vec<Vec<Fe>> = channels
            .iter()
            .map(|&c| {
                let mut u = vec![Fe::ZERO; n];
                u[c] = Fe::ONE;
                u
            })
            .collect();
        Self::new(units.clone(), units, strategy, n, channels.len(), field)
    }

    pub fn lambda(&self) -> &[Vec<Fe>] {
        &self.lambda
    }

    pub fn mu(&self) -> &[Vec<Fe>] {
        &self.mu
    }
}

pub struct GeneralizedMedium {
    n: usize,
    field: Field,
    adversary: GeneralizedAdversary,
    transcript: Transcript,
    view: EveView,
}

impl GeneralizedMedium {
    pub fn new(n: usize, field: &Field, adversary: GeneralizedAdversary) -> Self {
        GeneralizedMedium {
            n,
            field: field.clone(),
            adversary,
            transcript: Transcript::new(n, field),
            view: EveView::default(),
        }
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

impl Medium for GeneralizedMedium {
    fn n(&self) -> usize {
        self.n
    }

    fn field(&self) -> &Field {
        &self.field
    }

    fn transmit(
        &mut self,
        direction: Direction,
        phase: &'static str,
        arrays: Vec<Vec<Fe>>,
        public: Option<Vec<Fe>>,
    ) -> Result<Vec<Vec<Fe>>, ChannelError> {
        let field = &self.field;
        check_arrays(&arrays, self.n, field)?;
        let adv = &mut self.adversary;
        let observed: Vec<Vec<Fe>> = arrays
            .iter()
            .map(|a| adv.lambda.iter().map(|l| field.dot(l, a)).collect())
            .collect();
        let ctx = DeltaContext {
            direction,
            phase,
            transmission: self.transcript.records.len(),
            observed: &observed,
            vectors: adv.mu.len(),
        };
        let deltas = adv.strategy.deltas(field, &ctx, &self.view);
        let mut delivered = arrays.clone();
        for (a, d) in delivered.iter_mut().zip(&deltas) {
            assert_eq!(d.len(), adv.mu.len(), "one delta per tampering vector");
            let mut e = vec![Fe::ZERO; self.n];
            for (&delta, mu) in d.iter().zip(&adv.mu) {
                if !field.contains(delta) {
                    return Err(ChannelError::ForeignSymbol(delta.0));
                }
                field.axpy(&mut e, delta, mu);
            }
            assert!(rank_of(field, &e) <= adv.mu.len());
            for (x, ej) in a.iter_mut().zip(e) {
                *x = field.add(*x, ej);
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

/// Runs a [`DeltaStrategy`] as a classical adversary on `channels`: the
/// symbol on `channels[i]` receives `+Δ^(i)`. Together with
/// [`GeneralizedAdversary::classical`] this embeds the classical model.
pub struct ClassicalAdapter {
    channels: BTreeSet<usize>,
    strategy: Box<dyn DeltaStrategy + Send>,
}

impl ClassicalAdapter {
    pub fn new(channels: BTreeSet<usize>, strategy: Box<dyn DeltaStrategy + Send>) -> Self {
        ClassicalAdapter { channels, strategy }
    }
}

impl Adversary for ClassicalAdapter {
    fn name(&self) -> &str {
        self.strategy.name()
    }

    fn choose_channels(&mut self, _n: usize, _t: usize) -> BTreeSet<usize> {
        self.channels.clone()
    }

    fn tamper(&mut self, field: &Field, ctx: &TamperContext<'_>, view: &EveView) -> Vec<Rewrite> {
        let dctx = DeltaContext {
            direction: ctx.direction,
            phase: ctx.phase,
            transmission: ctx.transmission,
            observed: ctx.observed,
            vectors: ctx.corrupted.len(),
        };
        let deltas = self.strategy.deltas(field, &dctx, view);
        let mut out = Vec::new();
        for (array, (d, obs)) in deltas.iter().zip(ctx.observed).enumerate() {
            for (i, &channel) in ctx.corrupted.iter().enumerate() {
                out.push(Rewrite {
                    array,
                    channel,
                    value: field.add(obs[i], d[i]),
                });
            }
        }
        out
    }
}

pub const GENERALIZED_ADVERSARIES: &[&str] = &["passive", "random", "targeted", "weight-two"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DeltaKind {
    Zero,
    Random,
    Targeted,
}

struct BuiltinDelta {
    kind: DeltaKind,
    name: &'static str,
    rng: ChaCha8Rng,
}

impl DeltaStrategy for BuiltinDelta {
    fn name(&self) -> &str {
        self.name
    }

    fn deltas(&mut self, field: &Field, ctx: &DeltaContext<'_>, _view: &EveView) -> Vec<Vec<Fe>> {
        let t = ctx.vectors;
        (0..ctx.observed.len())
            .map(|a| match self.kind {
                DeltaKind::Zero => vec![Fe::ZERO; t],
                DeltaKind::Targeted if ctx.transmission == 0 && a < t => {
                    let mut d = vec![Fe::ZERO; t];
                    d[a] = field.random_nonzero(&mut self.rng);
                    d
                }
                _ => (0..t).map(|_| field.random(&mut self.rng)).collect(),
            })
            .collect()
    }
}

/// Seeded delta strategy by name: `passive` (no tampering), `random`,
/// `targeted` (one tampering direction per early round-one word).
pub fn delta_strategy(name: &str, seed: u64) -> Option<Box<dyn DeltaStrategy + Send>> {
    let (kind, name) = match name {
        "passive" => (DeltaKind::Zero, "passive"),
        "random" | "weight-two" => (DeltaKind::Random, "random"),
        "targeted" => (DeltaKind::Targeted, "targeted"),
        _ => return None,
    };
    Some(Box::new(BuiltinDelta {
        kind,
        name,
        rng: ChaCha8Rng::seed_from_u64(seed),
    }))
}

fn random_base_vector<R: Rng>(rng: &mut R, n: usize, p: u32, weight: Option<usize>) -> Vec<Fe> {
    loop {
        let v: Vec<Fe> = match weight {
            None => (0..n).map(|_| Fe(rng.gen_range(0..p))).collect(),
            Some(w) => {
                let pos = rand::seq::index::sample(rng, n, w.min(n));
                let mut v = vec![Fe::ZERO; n];
                for j in pos {
                    v[j] = Fe(rng.gen_range(1..p));
                }
                v
            }
        };
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

/// Built-in generalized adversary. `λ` is `t` linearly independent random
/// base-field vectors (weight two for `weight-two`), `μ` likewise random.
pub fn generalized_adversary(
    name: &str,
    n: usize,
    t: usize,
    field: &Field,
    seed: u64,
) -> Option<GeneralizedAdversary> {
    let strategy = delta_strategy(name, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17) ^ 0x5eed);
    let p = field.characteristic();
    let base = Field::prime(p as u64).expect("prime characteristic");
    let weight = (name == "weight-two").then_some(2);
    let lambda = loop {
        let ls: Vec<Vec<Fe>> = (0..t).map(|_| random_base_vector(&mut rng, n, p, weight)).collect();
        if linalg::rank(&base, &ls) == t {
            break ls;
        }
    };
    let mu: Vec<Vec<Fe>> = (0..t).map(|_| random_base_vector(&mut rng, n, p, weight)).collect();
    GeneralizedAdversary::new(lambda, mu, strategy, n, t, field).ok()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankParams {
    pub n: usize,
    pub t: usize,
    pub l: usize,
    pub q: u64,
    pub m: u32,
    pub seed: u64,
}

impl RankParams {
    pub fn validate(&self) -> Result<(), RankError> {
        if !is_prime(self.q) {
            return Err(RankError::BaseNotPrime(self.q));
        }
        if self.t == 0 || self.n < 2 * self.t + 1 {
            return Err(RankError::ThresholdTooLarge { t: self.t, n: self.n });
        }
        if (self.m as usize) < self.n + 1 {
            return Err(RankError::ExtensionTooSmall {
                m: self.m,
                needed: self.n + 1,
            });
        }
        if self.l == 0 {
            return Err(RankError::InvalidParams("at least one secret is required".into()));
        }
        Ok(())
    }
}

/// Public objects shared by both parties.
#[derive(Debug, Clone)]
pub struct RankSetup {
    pub params: RankParams,
    pub field: Field,
    pub code: GabidulinCode,
    pub mask: RankMask,
    pub broadcast: RankBroadcast,
}

impl RankSetup {
    pub fn new(params: &RankParams) -> Result<Self, RankError> {
        params.validate()?;
        let (code, mask) = rank_privacy_pair(params.n, params.t, params.q, params.m)?;
        let broadcast = RankBroadcast::new(params.n, params.q, params.m)?;
        Ok(RankSetup {
            params: params.clone(),
            field: code.field().clone(),
            code,
            mask,
            broadcast,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RankOutcome {
    pub delivered: Vec<Fe>,
    pub transcript: Transcript,
    pub ledger: CostLedger,
    pub eve_view: EveView,
    pub codewords: Vec<Word>,
    pub received: Vec<Word>,
    pub pseudo_basis: Vec<usize>,
}

fn rank_broadcast<M: Medium>(
    medium: &mut M,
    bcast: &RankBroadcast,
    phase: &'static str,
    symbols: &[Fe],
) -> Result<Vec<Fe>, ProtocolError> {
    if symbols.is_empty() {
        return Ok(Vec::new());
    }
    let arrays = symbols.iter().map(|&s| bcast.encode(s)).collect();
    let delivered = medium.transmit(Direction::AliceToBob, phase, arrays, Some(symbols.to_vec()))?;
    delivered
        .iter()
        .map(|y| {
            bcast
                .decode(y)
                .ok_or_else(|| ProtocolError::Violation("rank broadcast out of radius".into()))
        })
        .collect()
}

/// Two-round rank protocol: Bob sends `t+l` codewords, Alice answers with
/// rank broadcasts of the pseudo-basis and, per secret, the syndrome of an
/// unused word and `s + h.y`.
pub fn run_rank_protocol<M: Medium>(
    setup: &RankSetup,
    secrets: &[Fe],
    medium: &mut M,
    source: &CodewordSource,
) -> Result<RankOutcome, ProtocolError> {
    let RankSetup {
        params,
        field,
        code,
        mask,
        broadcast,
    } = setup;
    let (n, t, l) = (params.n, params.t, params.l);
    if secrets.len() != l {
        return Err(ProtocolError::SecretCount {
            expected: l,
            got: secrets.len(),
        });
    }
    if secrets.iter().any(|s| !field.contains(*s)) {
        return Err(ProtocolError::InvalidParams("secret outside the symbol field".into()));
    }
    let total = t + l;
    let q = field.order();
    let digits = index_digits(q, total);

    let xs = match source {
        CodewordSource::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..total).map(|_| code.random_codeword(&mut rng)).collect()
        }
        CodewordSource::Fixed(ws) if ws.len() == total && ws.iter().all(|w| code.is_codeword(w)) => {
            ws.clone()
        }
        CodewordSource::Fixed(_) => {
            return Err(ProtocolError::InvalidParams(format!(
                "need {total} codewords of the protocol code"
            )))
        }
    };
    let start = medium.transcript().records.len();
    let ys = medium.transmit(Direction::BobToAlice, phase::ROUND1, xs.clone(), None)?;

    // Alice.
    let pb = pseudobasis::compute_pseudo_basis(code, &ys)?;
    let indices = pb.indices();
    let mut overhead = vec![Fe(indices.len() as u32)];
    for &i in &indices {
        let mut v = i;
        let mut d = vec![Fe::ZERO; digits];
        for slot in d.iter_mut().rev() {
            *slot = Fe((v % q as usize) as u32);
            v /= q as usize;
        }
        overhead.extend(d);
    }
    let unused: Vec<usize> = (0..total).filter(|i| !indices.contains(i)).take(l).collect();
    let flat: Vec<Fe> = pb.entries.iter().flat_map(|(_, w)| w.clone()).collect();
    let mut masked = Vec::new();
    for (s, &j) in secrets.iter().zip(&unused) {
        masked.extend(code.syndrome(&ys[j])?);
        masked.push(field.add(*s, mask.mask(field, &ys[j])));
    }
    let bob_overhead = rank_broadcast(medium, broadcast, phase::PB_OVERHEAD, &overhead)?;
    let bob_flat = rank_broadcast(medium, broadcast, phase::PSEUDO_BASIS, &flat)?;
    let bob_masked = rank_broadcast(medium, broadcast, phase::MASKED_SECRETS, &masked)?;

    // Bob.
    let violation = |m: &str| ProtocolError::Violation(m.to_string());
    let w = bob_overhead.first().ok_or_else(|| violation("empty overhead"))?.0 as usize;
    if bob_overhead.len() != 1 + w * digits || bob_flat.len() != w * n {
        return Err(violation("pseudo-basis block size mismatch"));
    }
    let bob_indices: Vec<usize> = bob_overhead[1..]
        .chunks(digits)
        .map(|c| c.iter().fold(0usize, |a, d| a * q as usize + d.0 as usize))
        .collect();
    if bob_indices.iter().any(|&i| i >= total) {
        return Err(violation("pseudo-basis index out of range"));
    }
    let mut bob_pb = PseudoBasis::default();
    for (&i, word) in bob_indices.iter().zip(bob_flat.chunks(n)) {
        bob_pb.syndromes.push(code.syndrome(word)?);
        bob_pb.entries.push((i, word.to_vec()));
    }
    let eb = pseudobasis::extract_error_basis(code, &bob_pb, &xs)?;
    // Every error in the span must have rank below the minimum distance;
    // the stacked coefficient matrices bound the rank of all of them.
    let stacked: Vec<Fe> = eb.errors.iter().flat_map(|(_, e)| e.clone()).collect();
    if error_space_rank(field, &stacked, n) > code.min_rank_distance() - 1 {
        return Err(violation("error space rank reaches the minimum distance"));
    }
    let bob_unused: Vec<usize> = (0..total)
        .filter(|i| !bob_indices.contains(i))
        .take(l)
        .collect();
    let r = code.redundancy();
    let mut delivered = Vec::with_capacity(l);
    for (chunk, &j) in bob_masked.chunks(r + 1).zip(&bob_unused) {
        let e = pseudobasis::recover_error(&eb, code, &chunk[..r])?;
        if rank_of(field, &e) > code.min_rank_distance() - 1 {
            return Err(violation("recovered error rank reaches the minimum distance"));
        }
        let y = field.add_vec(&xs[j], &e);
        delivered.push(field.sub(chunk[r], mask.mask(field, &y)));
    }
    if delivered.len() != l {
        return Err(violation("masked-secret block too short"));
    }

    let mut transcript = medium.transcript().clone();
    transcript.records.drain(..start);
    let mut eve_view = medium.eve_view().clone();
    eve_view.records.drain(..start);
    Ok(RankOutcome {
        delivered,
        ledger: cost_report(&transcript),
        transcript,
        eve_view,
        codewords: xs,
        received: ys,
        pseudo_basis: indices,
    })
}

/// Dimension over `F_p` of the row space spanned by all the `m x n`
/// coefficient matrices of the length-`n` words in `flat`.
fn error_space_rank(field: &Field, flat: &[Fe], n: usize) -> usize {
    if flat.is_empty() {
        return 0;
    }
    let base = Field::prime(field.characteristic() as u64).expect("prime characteristic");
    let m = field.degree() as usize;
    let mut rows = Vec::new();
    for word in flat.chunks(n) {
        let coeffs: Vec<Vec<u32>> = word.iter().map(|&s| field.coefficients(s)).collect();
        for i in 0..m {
            rows.push((0..n).map(|j| Fe(coeffs[j][i])).collect::<Vec<_>>());
        }
    }
    linalg::rank(&base, &rows)
}

/// Exhaustive audit of the rank protocol with one secret against the named
/// generalized adversary, rebuilt from `seed` for every run.
pub fn rank_privacy_audit(
    params: &RankParams,
    adversary: &str,
    budget: u64,
) -> Result<AuditReport, AuditError> {
    let params = RankParams { l: 1, ..params.clone() };
    let setup = RankSetup::new(&params).map_err(|e| AuditError::Setup(e.to_string()))?;
    let field = &setup.field;
    let (n, t) = (params.n, params.t);
    if generalized_adversary(adversary, n, t, field, params.seed).is_none() {
        return Err(AuditError::UnknownAdversary(adversary.to_string()));
    }
    let words = t + 1;
    let k = t + 1;
    let q = field.order();
    let exponent = k * words + 1;
    check_budget(q, exponent, budget)?;
    let tuples = (q as u64).pow((k * words) as u32);
    let secrets: Vec<Fe> = field.elements().collect();
    audit_distributions(&secrets, tuples, |s, i| {
        let xs = tuple_codewords(i, words, k, q, |m| setup.code.encode(m).expect("message length k"));
        let adv = generalized_adversary(adversary, n, t, field, params.seed).expect("checked above");
        let mut medium = GeneralizedMedium::new(n, field, adv);
        let out = run_rank_protocol(&setup, &[s], &mut medium, &CodewordSource::Fixed(xs))?;
        Ok((out.eve_view.key(), out.delivered == [s]))
    })
}
