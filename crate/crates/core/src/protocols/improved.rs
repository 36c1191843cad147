use std::collections::BTreeSet;

use crate::broadcast;
use crate::channels::{cost_report, phase, Adversary, ChannelMedium, Direction, Medium};
use crate::gf::Fe;
use crate::mds::{self, LinearCode, MaskVector, ReedSolomon, Word};
use crate::pseudobasis::{self, ErrorBasis, PseudoBasis};

use super::basic::{bob_error_basis, first_unused};
use super::{
    check_secrets, generalized_broadcast, index_digits, overhead_payload, parse_overhead,
    plain_broadcast, setup, unflatten, Branch, CodewordSource, ProtocolError, ProtocolOutcome,
    SessionParams, SpecialWordReport,
};

/// The step of the search that produced the special word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialStep {
    /// A pseudo-basis word did not decode within radius `t/2`.
    Undecodable,
    /// A decoded error estimate had `3 wt > t`.
    Heavy,
    /// A running combination of error estimates reached `3 wt > t`.
    Accumulated,
    /// The full combination of all `w` words.
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialWord {
    pub word: Word,
    /// One coefficient per pseudo-basis entry, in pseudo-basis order.
    pub coefficients: Vec<Fe>,
    pub step: SpecialStep,
}

/// Finds a combination of pseudo-basis words whose true error has weight at
/// least `min(w, t/3)`. `None` for an empty pseudo-basis.
pub fn special_word_search(code: &ReedSolomon, pb: &PseudoBasis, t: usize) -> Option<SpecialWord> {
    let w = pb.len();
    if w == 0 {
        return None;
    }
    let field = code.field();
    let unit = |i: usize| {
        let mut c = vec![Fe::ZERO; w];
        c[i] = Fe::ONE;
        c
    };
    let mut errors = Vec::with_capacity(w);
    for (i, (_, y)) in pb.entries.iter().enumerate() {
        match code.decode(y) {
            Some(d) => errors.push(d.error),
            None => {
                return Some(SpecialWord {
                    word: y.clone(),
                    coefficients: unit(i),
                    step: SpecialStep::Undecodable,
                })
            }
        }
    }
    if let Some(i) = errors.iter().position(|e| 3 * mds::hamming_weight(e) > t) {
        return Some(SpecialWord {
            word: pb.entries[i].1.clone(),
            coefficients: unit(i),
            step: SpecialStep::Heavy,
        });
    }
    let mut f = errors[0].clone();
    let mut y = pb.entries[0].1.clone();
    let mut coefficients = unit(0);
    for i in 1..w {
        let e = &errors[i];
        let lambda = field
            .nonzero_elements()
            .find(|&c| {
                f.iter()
                    .zip(e)
                    .all(|(&fj, &ej)| fj.is_zero() || !field.add(fj, field.mul(c, ej)).is_zero())
            })
            .expect("q - 1 exceeds the number of excluded values");
        field.axpy(&mut f, lambda, e);
        field.axpy(&mut y, lambda, &pb.entries[i].1);
        coefficients[i] = lambda;
        if 3 * mds::hamming_weight(&f) > t {
            return Some(SpecialWord {
                word: y,
                coefficients,
                step: SpecialStep::Accumulated,
            });
        }
    }
    Some(SpecialWord {
        word: y,
        coefficients,
        step: SpecialStep::Final,
    })
}

/// Bob's view after the pseudo-basis transfer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastPseudoBasis {
    pub indices: Vec<usize>,
    pub words: Vec<Word>,
    /// Channels Bob identified as corrupted from the special word.
    pub known_bad: BTreeSet<usize>,
    /// Generalized-broadcast parameter `min(w, floor(t/3))`.
    pub m: usize,
}

/// Sends the overhead (`w`, indices, coefficients), the special word and the
/// pseudo-basis words by `m`-generalized broadcast. With `m = 0` the special
/// word is skipped and the words go by plain broadcast.
pub fn send_pseudo_basis_fast<M: Medium>(
    medium: &mut M,
    pb: &PseudoBasis,
    special: Option<&SpecialWord>,
    t: usize,
    total_words: usize,
    originals: &[Word],
) -> Result<FastPseudoBasis, ProtocolError> {
    let field = medium.field().clone();
    let n = medium.n();
    let q = field.order();
    let digits = index_digits(q, total_words);

    // Alice.
    let m = pb.len().min(t / 3);
    let special = if m > 0 {
        Some(special.ok_or_else(|| ProtocolError::Violation("special word missing".into()))?)
    } else {
        None
    };
    let overhead = overhead_payload(
        &pb.indices(),
        special.map(|s| s.coefficients.as_slice()),
        digits,
        q,
    );
    let bob_overhead = plain_broadcast(medium, phase::PB_OVERHEAD, &overhead)?;
    let bob_special = match special {
        Some(s) => Some(plain_broadcast(medium, phase::PSEUDO_BASIS, &s.word)?),
        None => None,
    };
    let flat: Vec<Fe> = pb.entries.iter().flat_map(|(_, w)| w.clone()).collect();
    let arrays = if flat.is_empty() {
        Vec::new()
    } else if m > 0 {
        generalized_broadcast(medium, phase::PSEUDO_BASIS, m, &flat)?
    } else {
        let block = broadcast::broadcast_encode(&flat, n);
        medium.transmit(Direction::AliceToBob, phase::PSEUDO_BASIS, block.arrays, Some(flat))?
    };

    // Bob.
    let (indices, coefficients) = parse_overhead(&bob_overhead, digits, q, total_words)?;
    let w = indices.len();
    let m = w.min(t / 3);
    let mut known_bad = BTreeSet::new();
    let flat = if m > 0 {
        let y = bob_special.ok_or_else(|| ProtocolError::Violation("special word missing".into()))?;
        if coefficients.len() != w {
            return Err(ProtocolError::Violation("coefficient count mismatch".into()));
        }
        let mut x = vec![Fe::ZERO; n];
        for (&c, &i) in coefficients.iter().zip(&indices) {
            field.axpy(&mut x, c, &originals[i]);
        }
        known_bad.extend(mds::support(&field.sub_vec(&y, &x)));
        broadcast::gen_broadcast_decode(m, &arrays, &known_bad, &field, n, w * n)?
    } else {
        broadcast::broadcast_decode(&arrays)?
    };
    let words = unflatten(&flat, n);
    if words.len() != w {
        return Err(ProtocolError::Violation("pseudo-basis word count mismatch".into()));
    }
    Ok(FastPseudoBasis {
        indices,
        words,
        known_bad,
        m,
    })
}

/// Alice sends all syndromes by `ceil(t/2)`-generalized broadcast and the
/// pairs `(z1, z2)` by plain broadcast. Bob, holding `xs` (his codewords
/// matching `ys`) and the error basis `eb`, opens either `z1` or `z2`
/// depending on the size of the global support.
#[allow(clippy::too_many_arguments)]
pub fn send_masked_secrets<M: Medium>(
    medium: &mut M,
    code: &ReedSolomon,
    mask: &MaskVector,
    t: usize,
    secrets: &[Fe],
    ys: &[Word],
    xs: &[Word],
    eb: &ErrorBasis,
) -> Result<(Vec<Fe>, Branch), ProtocolError> {
    let field = medium.field().clone();
    let n = medium.n();
    let r = code.redundancy();
    let m_syn = t.div_ceil(2);

    // Alice.
    let mut syndromes = Vec::with_capacity(ys.len() * r);
    let mut z = Vec::with_capacity(2 * ys.len());
    for (s, y) in secrets.iter().zip(ys) {
        syndromes.extend(code.syndrome(y)?);
        z.push(field.add(*s, mask.mask(&field, y)));
        z.push(match code.decode(y) {
            Some(d) => field.add(*s, mask.mask(&field, &d.codeword)),
            None => Fe::ZERO,
        });
    }
    let syn_arrays = generalized_broadcast(medium, phase::MASKED_SECRETS, m_syn, &syndromes)?;
    let bob_z = plain_broadcast(medium, phase::MASKED_SECRETS, &z)?;

    // Bob.
    if bob_z.len() != 2 * xs.len() {
        return Err(ProtocolError::Violation("masked-secret block size mismatch".into()));
    }
    if 2 * eb.support.len() >= t {
        let syn = broadcast::gen_broadcast_decode(
            m_syn,
            &syn_arrays,
            &eb.support,
            &field,
            n,
            xs.len() * r,
        )?;
        let mut out = Vec::with_capacity(xs.len());
        for ((x, s), pair) in xs.iter().zip(syn.chunks(r)).zip(bob_z.chunks(2)) {
            let e = pseudobasis::recover_error(eb, code, s)?;
            let y = field.add_vec(x, &e);
            out.push(field.sub(pair[0], mask.mask(&field, &y)));
        }
        Ok((out, Branch::Syndrome))
    } else {
        let out = xs
            .iter()
            .zip(bob_z.chunks(2))
            .map(|(x, pair)| field.sub(pair[1], mask.mask(&field, x)))
            .collect();
        Ok((out, Branch::Decoded))
    }
}

/// The improved protocol with Bob's codewords drawn from `params.seed`.
pub fn run_improved(
    params: &SessionParams,
    secrets: &[Fe],
    adversary: Box<dyn Adversary + Send>,
) -> Result<ProtocolOutcome, ProtocolError> {
    run_improved_with(params, secrets, adversary, &CodewordSource::Random(params.seed))
}

/// Bob sends `t+l+1` codewords; Alice sends the pseudo-basis through the
/// special word and generalized broadcast, then the masked secrets.
pub fn run_improved_with(
    params: &SessionParams,
    secrets: &[Fe],
    adversary: Box<dyn Adversary + Send>,
    source: &CodewordSource,
) -> Result<ProtocolOutcome, ProtocolError> {
    check_secrets(params, secrets)?;
    let (code, mask) = setup(params)?;
    let field = &params.field;
    let (n, t, l) = (params.n, params.t, params.l);
    let total = t + l + 1;
    let mut medium = ChannelMedium::new(n, t, field, adversary)?;

    let xs = source.draw(&code, total)?;
    let ys = medium.transmit(Direction::BobToAlice, phase::ROUND1, xs.clone(), None)?;

    let pb = pseudobasis::compute_pseudo_basis(&code, &ys)?;
    let special = special_word_search(&code, &pb, t);
    let fast = send_pseudo_basis_fast(&mut medium, &pb, special.as_ref(), t, total, &xs)?;

    let alice_unused: Vec<Word> = first_unused(&pb.indices(), total, l)
        .into_iter()
        .map(|i| ys[i].clone())
        .collect();
    let eb = bob_error_basis(&code, &fast.indices, fast.words, &xs)?;
    let bob_unused: Vec<Word> = first_unused(&fast.indices, total, l)
        .into_iter()
        .map(|i| xs[i].clone())
        .collect();
    let (delivered, branch) = send_masked_secrets(
        &mut medium,
        &code,
        &mask,
        t,
        secrets,
        &alice_unused,
        &bob_unused,
        &eb,
    )?;

    let special = special.map(|s| {
        let mut x = vec![Fe::ZERO; n];
        for (&c, (i, _)) in s.coefficients.iter().zip(&pb.entries) {
            field.axpy(&mut x, c, &xs[*i]);
        }
        SpecialWordReport {
            step: s.step,
            true_error_weight: mds::hamming_weight(&field.sub_vec(&s.word, &x)),
            coefficients: s.coefficients,
        }
    });
    Ok(ProtocolOutcome {
        delivered,
        ledger: cost_report(medium.transcript()),
        eve_view: medium.eve_view().clone(),
        corrupted: medium.bundle().corrupted.clone(),
        transcript: medium.into_transcript(),
        codewords: xs,
        received: ys,
        pseudo_basis: pb.indices(),
        special,
        generalized_m: Some(fast.m),
        branch: Some(branch),
    })
}
