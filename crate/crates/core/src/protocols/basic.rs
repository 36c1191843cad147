use std::collections::BTreeSet;

use crate::broadcast;
use crate::channels::{cost_report, phase, Adversary, ChannelMedium, Direction, Medium};
use crate::gf::Fe;
use crate::mds::{self, LinearCode, MaskVector, ReedSolomon, Word};
use crate::pseudobasis::{self, ErrorBasis, PseudoBasis};

use super::{
    check_secrets, generalized_broadcast, index_digits, overhead_payload, parse_overhead,
    plain_broadcast, setup, unflatten, CodewordSource, ProtocolError, ProtocolOutcome,
    SessionParams,
};

/// The basic protocol with Bob's codewords drawn from `params.seed`.
pub fn run_basic(
    params: &SessionParams,
    secrets: &[Fe],
    adversary: Box<dyn Adversary + Send>,
) -> Result<ProtocolOutcome, ProtocolError> {
    run_basic_with(params, secrets, adversary, &CodewordSource::Random(params.seed))
}

/// Bob sends `t+l` codewords; Alice broadcasts a pseudo-basis of what she
/// received, then for each secret the syndrome of an unused word and the
/// secret masked by `h.y`.
pub fn run_basic_with(
    params: &SessionParams,
    secrets: &[Fe],
    adversary: Box<dyn Adversary + Send>,
    source: &CodewordSource,
) -> Result<ProtocolOutcome, ProtocolError> {
    check_secrets(params, secrets)?;
    let (code, mask) = setup(params)?;
    let field = &params.field;
    let (n, t, l) = (params.n, params.t, params.l);
    let q = field.order();
    let total = t + l;
    let digits = index_digits(q, total);
    let mut medium = ChannelMedium::new(n, t, field, adversary)?;

    // Round 1.
    let xs = source.draw(&code, total)?;
    let ys = medium.transmit(Direction::BobToAlice, phase::ROUND1, xs.clone(), None)?;

    // Round 2, Alice.
    let pb = pseudobasis::compute_pseudo_basis(&code, &ys)?;
    let alice = Alice::new(&code, &mask, &ys, &pb, l)?;
    let overhead = overhead_payload(&pb.indices(), None, digits, q);
    let bob_overhead = plain_broadcast(&mut medium, phase::PB_OVERHEAD, &overhead)?;
    let flat: Vec<Fe> = pb.entries.iter().flat_map(|(_, w)| w.clone()).collect();
    let bob_flat = if flat.is_empty() {
        Vec::new()
    } else {
        plain_broadcast(&mut medium, phase::PSEUDO_BASIS, &flat)?
    };
    let masked = alice.masked_payload(secrets);
    let bob_masked = plain_broadcast(&mut medium, phase::MASKED_SECRETS, &masked)?;

    // Bob.
    let (indices, _) = parse_overhead(&bob_overhead, digits, q, total)?;
    let words = unflatten(&bob_flat, n);
    if words.len() != indices.len() {
        return Err(ProtocolError::Violation("pseudo-basis word count mismatch".into()));
    }
    let eb = bob_error_basis(&code, &indices, words, &xs)?;
    let unused = first_unused(&indices, total, l);
    let r = code.redundancy();
    let mut delivered = Vec::with_capacity(l);
    for (chunk, &j) in bob_masked.chunks(r + 1).zip(&unused) {
        let e = pseudobasis::recover_error(&eb, &code, &chunk[..r])?;
        let y = field.add_vec(&xs[j], &e);
        delivered.push(field.sub(chunk[r], mask.mask(field, &y)));
    }
    if delivered.len() != l {
        return Err(ProtocolError::Violation("masked-secret block too short".into()));
    }

    Ok(ProtocolOutcome {
        delivered,
        ledger: cost_report(medium.transcript()),
        eve_view: medium.eve_view().clone(),
        corrupted: medium.bundle().corrupted.clone(),
        transcript: medium.into_transcript(),
        codewords: xs,
        received: ys,
        pseudo_basis: pb.indices(),
        special: None,
        generalized_m: None,
        branch: None,
    })
}

struct Alice<'a> {
    code: &'a ReedSolomon,
    mask: &'a MaskVector,
    unused: Vec<&'a Word>,
}

impl<'a> Alice<'a> {
    fn new(
        code: &'a ReedSolomon,
        mask: &'a MaskVector,
        ys: &'a [Word],
        pb: &PseudoBasis,
        l: usize,
    ) -> Result<Self, ProtocolError> {
        let unused: Vec<&Word> = first_unused(&pb.indices(), ys.len(), l)
            .into_iter()
            .map(|i| &ys[i])
            .collect();
        if unused.len() < l {
            return Err(ProtocolError::Violation("not enough unused words".into()));
        }
        Ok(Alice { code, mask, unused })
    }

    /// Per secret: the syndrome of its word, then `s + h.y`.
    fn masked_payload(&self, secrets: &[Fe]) -> Vec<Fe> {
        let field = self.code.field();
        let mut out = Vec::new();
        for (s, y) in secrets.iter().zip(&self.unused) {
            out.extend(self.code.syndrome(y).expect("received words have length n"));
            out.push(field.add(*s, self.mask.mask(field, y)));
        }
        out
    }
}

/// The first `l` word positions below `total` that are not in `indices`.
pub(crate) fn first_unused(indices: &[usize], total: usize, l: usize) -> Vec<usize> {
    (0..total).filter(|i| !indices.contains(i)).take(l).collect()
}

pub(crate) fn bob_error_basis(
    code: &ReedSolomon,
    indices: &[usize],
    words: Vec<Word>,
    xs: &[Word],
) -> Result<ErrorBasis, ProtocolError> {
    let mut pb = PseudoBasis::default();
    for (&i, w) in indices.iter().zip(words) {
        pb.syndromes.push(code.syndrome(&w)?);
        pb.entries.push((i, w));
    }
    Ok(pseudobasis::extract_error_basis(code, &pb, xs)?)
}

/// Sends the pseudo-basis words one at a time, the `i`-th by
/// `(i-1)`-generalized broadcast. Bob, holding `originals`, learns the
/// support of each word's error before the next arrives. Returns Bob's copy
/// of the words.
pub fn send_pseudo_basis_incremental<M: Medium>(
    medium: &mut M,
    pb: &PseudoBasis,
    originals: &[Word],
) -> Result<Vec<Word>, ProtocolError> {
    let field = medium.field().clone();
    let n = medium.n();
    let mut known_bad = BTreeSet::new();
    let mut bob_words = Vec::with_capacity(pb.len());
    for (m, (index, word)) in pb.entries.iter().enumerate() {
        let received = if m == 0 {
            plain_broadcast(medium, phase::PSEUDO_BASIS, word)?
        } else {
            let arrays = generalized_broadcast(medium, phase::PSEUDO_BASIS, m, word)?;
            broadcast::gen_broadcast_decode(m, &arrays, &known_bad, &field, n, n)?
        };
        let x = originals
            .get(*index)
            .ok_or(pseudobasis::PseudoBasisError::MissingOriginal(*index))?;
        known_bad.extend(mds::support(&field.sub_vec(&received, x)));
        bob_words.push(received);
    }
    Ok(bob_words)
}
