use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use psmt::channels::{ChannelMedium, Medium};
use psmt::pseudobasis::compute_pseudo_basis;
use psmt::rankmetric::*;
use psmt::protocols::CodewordSource;
use psmt::{Fe, Field, LinearCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination mod p on the m x n coefficient matrix.
fn oracle_rank(field: &Field, w: &[Fe]) -> usize {
    let p = field.characteristic();
    let m = field.degree() as usize;
    let mut mat: Vec<Vec<u32>> = (0..m)
        .map(|i| w.iter().map(|&s| field.coefficients(s)[i]).collect())
        .collect();
    let cols = w.len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m).find(|&r| mat[r][c] != 0) else {
            continue;
        };
        mat.swap(rank, piv);
        let inv = (1..p).find(|&x| x * mat[rank][c] % p == 1).unwrap();
        for v in mat[rank].iter_mut() {
            *v = *v * inv % p;
        }
        for r in 0..m {
            if r != rank && mat[r][c] != 0 {
                let f = mat[r][c];
                for j in 0..cols {
                    mat[r][j] = (mat[r][j] + p * p - f * mat[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn all_messages(field: &Field, k: usize) -> Vec<Vec<Fe>> {
    let q = field.order();
    (0..(q as u64).pow(k as u32))
        .map(|mut i| {
            (0..k)
                .map(|_| {
                    let d = (i % q as u64) as u32;
                    i /= q as u64;
                    Fe(d)
                })
                .collect()
        })
        .collect()
}

fn outer(field: &Field, delta: Fe, mu: &[Fe]) -> Vec<Fe> {
    mu.iter().map(|&c| field.mul(delta, c)).collect()
}

#[test]
fn gabidulin_is_mrd_exhaustively() {
    for k in 1..=2 {
        let code = GabidulinCode::new(3, k, 2, 3).unwrap();
        let field = code.field().clone();
        let min = all_messages(&field, k)
            .iter()
            .skip(1)
            .map(|msg| {
                let c = code.encode(msg).unwrap();
                assert!(code.is_codeword(&c));
                rank_of(&field, &c)
            })
            .min()
            .unwrap();
        assert_eq!(min, 3 - k + 1, "k = {k}");
        assert_eq!(code.min_rank_distance(), min);
    }
    // Every nonzero word of the [3,1] code has full rank.
    let code = GabidulinCode::new(3, 1, 2, 3).unwrap();
    let f = code.field().clone();
    let full = f.nonzero_elements().filter(|&a| rank_of(&f, &code.encode(&[a]).unwrap()) == 3).count();
    assert_eq!(full, 7);
}

#[test]
fn gabidulin_is_mrd_over_f3() {
    let code = GabidulinCode::new(3, 2, 3, 3).unwrap();
    let field = code.field().clone();
    let min = all_messages(&field, 2)
        .iter()
        .skip(1)
        .map(|msg| rank_of(&field, &code.encode(msg).unwrap()))
        .min()
        .unwrap();
    assert_eq!(min, 2);
}

#[test]
fn rank_of_matches_row_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (p, m, n) in [(2u64, 4u32, 5usize), (2, 6, 4), (3, 3, 4), (5, 2, 3)] {
        let field = Field::extension_of_degree(p, m).unwrap();
        for _ in 0..2_500 {
            let w: Vec<Fe> = (0..n).map(|_| field.random(&mut rng)).collect();
            assert_eq!(rank_of(&field, &w), oracle_rank(&field, &w));
        }
    }
}

#[test]
fn sum_of_independent_outer_products_has_rank_t() {
    let field = Field::extension_of_degree(2, 4).unwrap();
    // Δ = 1, x and μ = (1,0,0,1), (0,1,1,0).
    let a = outer(&field, Fe(1), &[Fe(1), Fe(0), Fe(0), Fe(1)]);
    let b = outer(&field, Fe(2), &[Fe(0), Fe(1), Fe(1), Fe(0)]);
    assert_eq!(rank_of(&field, &a), 1);
    assert_eq!(rank_of(&field, &field.add_vec(&a, &b)), 2);
}

/// The syndrome map is injective on every subspace spanned by outer-product
/// errors whose elements all have rank below the minimum distance.
#[test]
fn syndrome_injective_on_low_rank_spans() {
    for m in 3..=4u32 {
        let field = Field::extension_of_degree(2, m).unwrap();
        let mus: Vec<Vec<Fe>> = (1..8u32).map(|b| (0..3).map(|j| Fe(b >> j & 1)).collect()).collect();
        let gens: Vec<Vec<Fe>> = field
            .nonzero_elements()
            .flat_map(|d| mus.iter().map(move |mu| (d, mu.clone())))
            .map(|(d, mu)| outer(&field, d, &mu))
            .collect();
        for k in 1..=2 {
            let code = GabidulinCode::new(3, k, 2, m).unwrap();
            let d = code.min_rank_distance();
            let (mut checked, mut skipped) = (0, 0);
            let mut check = |basis: &[&Vec<Fe>]| {
                let span: BTreeSet<Vec<Fe>> = all_messages(&field, basis.len())
                    .iter()
                    .map(|c| {
                        let mut w = vec![Fe::ZERO; 3];
                        for (&ci, b) in c.iter().zip(basis) {
                            field.axpy(&mut w, ci, b);
                        }
                        w
                    })
                    .collect();
                if span.iter().any(|w| rank_of(&field, w) > d - 1) {
                    skipped += 1;
                    return;
                }
                let mut seen = HashMap::new();
                for w in &span {
                    let s = code.syndrome(w).unwrap();
                    if let Some(prev) = seen.insert(s, w.clone()) {
                        panic!("syndrome collision between {prev:?} and {w:?}");
                    }
                }
                checked += 1;
            };
            for (i, a) in gens.iter().enumerate() {
                check(&[a]);
                if m == 3 || k == 1 {
                    for b in &gens[i + 1..] {
                        check(&[a, b]);
                    }
                }
            }
            assert!(checked > 0 && (k == 1 || m == 4 || skipped > 0), "m={m} k={k}");
        }
    }
}

#[test]
fn privacy_pair_views_are_uniform() {
    let (code, mask) = rank_privacy_pair(3, 1, 2, 4).unwrap();
    let field = code.field().clone();
    assert!(!mask.alpha.is_zero());
    let codewords: Vec<Vec<Fe>> = all_messages(&field, 2)
        .iter()
        .map(|msg| code.encode(msg).unwrap())
        .collect();
    assert_eq!(codewords.len(), 256);
    for b in 1..8u32 {
        let lambda: Vec<Fe> = (0..3).map(|j| Fe(b >> j & 1)).collect();
        let mut fibers: HashMap<(Fe, Fe), usize> = HashMap::new();
        for x in &codewords {
            *fibers.entry((field.dot(&lambda, x), mask.mask(&field, x))).or_default() += 1;
        }
        assert_eq!(fibers.len(), 256, "lambda {b:03b}");
        assert!(fibers.values().all(|&c| c == 1));
    }
    // h.x = -alpha x_{n+1} on the parent code.
    let parent_msgs = all_messages(&field, 2);
    for msg in parent_msgs.iter().take(64) {
        let c = mask.parent.encode(msg).unwrap();
        let hx = mask.mask(&field, &c[..3]);
        assert_eq!(hx, field.neg(field.mul(mask.alpha, c[3])));
    }
}

#[test]
fn broadcast_recovers_rank_one_errors_and_flags_rank_two() {
    let b = RankBroadcast::new(3, 2, 3).unwrap();
    let f = b.code().field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut wrong = 0;
    for _ in 0..500 {
        let alpha = f.random(&mut rng);
        let c = b.encode(alpha);
        let e: Vec<Fe> = (0..3).map(|_| f.random(&mut rng)).collect();
        let got = b.decode(&f.add_vec(&c, &e));
        match rank_of(&f, &e) {
            0 | 1 => assert_eq!(got, Some(alpha)),
            _ => wrong += usize::from(got != Some(alpha)),
        }
    }
    assert!(wrong > 0);
    assert!(matches!(RankBroadcast::new(3, 2, 17), Err(RankError::FieldTooLarge(_))));
}

#[test]
fn dependent_rank_errors_give_one_pseudo_basis_word() {
    let code = GabidulinCode::new(3, 2, 2, 4).unwrap();
    let f = code.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let e1 = outer(&f, Fe(6), &[Fe(1), Fe(1), Fe(0)]);
    let e2 = f.scale_vec(Fe(9), &e1);
    let ys: Vec<Vec<Fe>> = [e1, e2]
        .iter()
        .map(|e| f.add_vec(&code.random_codeword(&mut rng), e))
        .collect();
    assert_eq!(compute_pseudo_basis(&code, &ys).unwrap().len(), 1);
    let clean: Vec<Vec<Fe>> = (0..4).map(|_| code.random_codeword(&mut rng)).collect();
    assert!(compute_pseudo_basis(&code, &clean).unwrap().is_empty());
}

fn params(l: usize, seed: u64) -> RankParams {
    RankParams { n: 3, t: 1, l, q: 2, m: 4, seed }
}

#[test]
fn rank_protocol_is_reliable() {
    for name in GENERALIZED_ADVERSARIES {
        for l in [1, 3] {
            let setup = RankSetup::new(&params(l, 0)).unwrap();
            let field = setup.field.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
            for seed in 0..250 {
                let secrets: Vec<Fe> = (0..l).map(|_| field.random(&mut rng)).collect();
                let adv = generalized_adversary(name, 3, 1, &field, seed).unwrap();
                let mut medium = GeneralizedMedium::new(3, &field, adv);
                let out = run_rank_protocol(&setup, &secrets, &mut medium, &CodewordSource::Random(seed))
                    .unwrap_or_else(|e| panic!("{name} seed {seed}: {e}"));
                assert_eq!(out.delivered, secrets, "{name} seed {seed}");
                assert!(out.transcript.is_two_round());
                if *name == "passive" {
                    assert!(out.pseudo_basis.is_empty());
                }
            }
        }
    }
}

#[test]
fn larger_rank_parameters() {
    let p = RankParams { n: 5, t: 2, l: 2, q: 2, m: 6, seed: 0 };
    let setup = RankSetup::new(&p).unwrap();
    let field = setup.field.clone();
    for seed in 0..40 {
        for name in ["random", "targeted"] {
            let adv = generalized_adversary(name, 5, 2, &field, seed).unwrap();
            let mut medium = GeneralizedMedium::new(5, &field, adv);
            let secrets = [Fe(seed as u32 % 64), Fe(7)];
            let out = run_rank_protocol(&setup, &secrets, &mut medium, &CodewordSource::Random(seed)).unwrap();
            assert_eq!(out.delivered, secrets);
        }
    }
}

#[test]
fn weight_two_vectors() {
    let field = Field::extension_of_degree(2, 4).unwrap();
    for seed in 0..20 {
        let adv = generalized_adversary("weight-two", 3, 1, &field, seed).unwrap();
        for v in adv.lambda().iter().chain(adv.mu()) {
            assert_eq!(v.iter().filter(|x| !x.is_zero()).count(), 2);
        }
    }
}

#[test]
fn parameter_validation() {
    let bad = [
        RankParams { q: 4, ..params(1, 0) },
        RankParams { m: 3, ..params(1, 0) },
        RankParams { t: 2, ..params(1, 0) },
        RankParams { l: 0, ..params(1, 0) },
        RankParams { m: 17, ..params(1, 0) },
    ];
    for p in bad {
        assert!(RankSetup::new(&p).is_err(), "{p:?}");
    }
    let field = Field::extension_of_degree(2, 4).unwrap();
    let foreign = vec![vec![Fe(3), Fe(0), Fe(0)]];
    let unit = vec![vec![Fe(1), Fe(0), Fe(0)]];
    let s = delta_strategy("passive", 0).unwrap();
    assert!(GeneralizedAdversary::new(foreign, unit, s, 3, 1, &field).is_err());
}

#[test]
fn unit_vectors_reproduce_classical_transcripts() {
    let setup = RankSetup::new(&params(2, 0)).unwrap();
    let field = setup.field.clone();
    for seed in 0..60 {
        for channel in 0..3 {
            for name in ["passive", "random", "targeted"] {
                let channels = BTreeSet::from([channel]);
                let gen = GeneralizedAdversary::classical(
                    &channels,
                    delta_strategy(name, seed).unwrap(),
                    3,
                    &field,
                )
                .unwrap();
                let mut a = GeneralizedMedium::new(3, &field, gen);
                let classic = ClassicalAdapter::new(channels, delta_strategy(name, seed).unwrap());
                let mut b = ChannelMedium::new(3, 1, &field, Box::new(classic)).unwrap();
                let secrets = [Fe(seed as u32 % 16), Fe(5)];
                let source = CodewordSource::Random(seed);
                let oa = run_rank_protocol(&setup, &secrets, &mut a, &source).unwrap();
                let ob = run_rank_protocol(&setup, &secrets, &mut b, &source).unwrap();
                assert_eq!(oa.transcript, ob.transcript);
                assert_eq!(oa.eve_view, ob.eve_view);
                assert_eq!(b.eve_view().records.len(), oa.transcript.records.len());
                assert_eq!(oa.delivered, secrets);
            }
        }
    }
}

proptest! {
    #[test]
    fn injected_errors_have_rank_at_most_t(seed in any::<u64>(), t in 1usize..=3) {
        let n = 2 * t + 1;
        let field = Field::extension_of_degree(2, n as u32 + 1).unwrap();
        let adv = generalized_adversary("random", n, t, &field, seed).unwrap();
        let mut medium = GeneralizedMedium::new(n, &field, adv);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sent: Vec<Vec<Fe>> = (0..4).map(|_| (0..n).map(|_| field.random(&mut rng)).collect()).collect();
        let got = medium
            .transmit(psmt::channels::Direction::BobToAlice, "round1", sent.clone(), None)
            .unwrap();
        for (x, y) in sent.iter().zip(&got) {
            prop_assert!(rank_distance(&field, x, y) <= t);
        }
    }

    #[test]
    fn rank_is_bounded_and_subadditive(seed in any::<u64>()) {
        let field = Field::extension_of_degree(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..6);
        let a: Vec<Fe> = (0..n).map(|_| field.random(&mut rng)).collect();
        let b: Vec<Fe> = (0..n).map(|_| field.random(&mut rng)).collect();
        let r = rank_of(&field, &a);
        prop_assert!(r <= n.min(3));
        prop_assert!(rank_of(&field, &field.add_vec(&a, &b)) <= r + rank_of(&field, &b));
        prop_assert_eq!(rank_of(&field, &field.scale_vec(Fe(5), &a)), r);
    }
}
