use std::collections::HashMap;

use proptest::prelude::*;
use psmt::mds::hamming_weight;
use psmt::{build_privacy_pair, Fe, Field, LinearCode, ReedSolomon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vectors(q: u32, len: usize) -> impl Iterator<Item = Vec<Fe>> {
    (0..(q as u64).pow(len as u32)).map(move |mut i| {
        (0..len)
            .map(|_| {
                let d = (i % q as u64) as u32;
                i /= q as u64;
                Fe(d)
            })
            .collect()
    })
}

fn codewords(code: &ReedSolomon) -> Vec<Vec<Fe>> {
    vectors(code.field().order(), code.dimension())
        .map(|m| code.encode(&m).unwrap())
        .collect()
}

fn distance(a: &[Fe], b: &[Fe]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[test]
fn mds_exhaustive() {
    for (q, n, k) in [
        (5, 3, 2),
        (5, 4, 2),
        (7, 5, 3),
        (7, 6, 4),
        (8, 7, 4),
        (9, 8, 3),
        (11, 10, 4),
        (13, 11, 3),
        (16, 15, 3),
    ] {
        let f = Field::with_order(q).unwrap();
        let code = ReedSolomon::new(n, k, &f).unwrap();
        let d = codewords(&code)
            .iter()
            .filter(|c| c.iter().any(|x| !x.is_zero()))
            .map(|c| hamming_weight(c))
            .min()
            .unwrap();
        assert_eq!(d, n - k + 1, "q={q} n={n} k={k}");
    }
}

#[test]
fn decoder_matches_brute_force() {
    for (q, n, k) in [(5, 3, 1), (5, 3, 2), (5, 4, 2), (7, 5, 3), (7, 5, 1), (8, 4, 2), (11, 4, 1)] {
        let f = Field::with_order(q).unwrap();
        let code = ReedSolomon::new(n, k, &f).unwrap();
        let radius = (n - k) / 2;
        assert_eq!(code.radius(), radius);
        let all = codewords(&code);
        let (mut ok, mut fail) = (0, 0);
        for y in vectors(q as u32, n) {
            let near = all.iter().find(|c| distance(c, &y) <= radius);
            match (code.decode(&y), near) {
                (Some(d), Some(c)) => {
                    assert_eq!(&d.codeword, c);
                    assert_eq!(f.add_vec(&d.codeword, &d.error), y);
                    ok += 1;
                }
                (None, None) => fail += 1,
                (got, want) => panic!("q={q} n={n} k={k} y={y:?}: {got:?} vs {want:?}"),
            }
        }
        assert!(ok > 0 && (radius == 0 || fail > 0 || n - k == 2 * radius && fail == 0));
    }
}

#[test]
fn decoder_on_random_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (q, n, k) in [(7u64, 5usize, 3usize), (13, 11, 6)] {
        let f = Field::with_order(q).unwrap();
        let code = ReedSolomon::new(n, k, &f).unwrap();
        let radius = code.radius();
        for _ in 0..10_000 {
            let c = code.random_codeword(&mut rng);
            let weight = rng.gen_range(0..=n - k);
            let mut y = c.clone();
            for j in rand::seq::index::sample(&mut rng, n, weight) {
                y[j] = f.add(y[j], f.random_nonzero(&mut rng));
            }
            match code.decode(&y) {
                Some(d) => {
                    assert!(code.is_codeword(&d.codeword));
                    assert!(distance(&d.codeword, &y) <= radius);
                    if weight <= radius {
                        assert_eq!(d.codeword, c);
                    }
                }
                None => assert!(weight > radius),
            }
        }
    }
}

#[test]
fn single_error_and_far_word_examples() {
    let f = Field::prime(7).unwrap();
    let code = ReedSolomon::new(5, 3, &f).unwrap();
    let x = code.encode(&[Fe(2), Fe(5), Fe(1)]).unwrap();
    for j in 0..5 {
        let mut y = x.clone();
        y[j] = f.add(y[j], Fe(3));
        assert_eq!(code.decode(&y).unwrap().codeword, x);
    }
    let all = codewords(&code);
    let far = vectors(7, 5)
        .find(|y| all.iter().all(|c| distance(c, y) >= 2))
        .unwrap();
    assert!(code.decode(&far).is_none());
}

/// Knowing any `t` coordinates of a uniformly random codeword leaves `h.x`
/// uniform: the map `x -> (x_T, h.x)` is a bijection onto `F_q^(t+1)`.
#[test]
fn privacy_pair_exhaustive() {
    for (q, n, t) in [(5u64, 3usize, 1usize), (7, 5, 2), (8, 7, 3), (4, 3, 1), (11, 5, 2)] {
        let f = Field::with_order(q).unwrap();
        let (code, mask) = build_privacy_pair(n, t, &f).unwrap();
        assert_eq!(code.min_distance(), n - t);
        let all = codewords(&code);
        assert_eq!(all.len(), (q as usize).pow(t as u32 + 1));
        for subset in 0u32..(1 << n) {
            if subset.count_ones() as usize != t {
                continue;
            }
            let coords: Vec<usize> = (0..n).filter(|j| subset >> j & 1 == 1).collect();
            let mut fibers: HashMap<Vec<Fe>, usize> = HashMap::new();
            for x in &all {
                let mut key: Vec<Fe> = coords.iter().map(|&j| x[j]).collect();
                key.push(mask.mask(&f, x));
                *fibers.entry(key).or_default() += 1;
            }
            assert_eq!(fibers.len(), all.len(), "q={q} n={n} coords={coords:?}");
        }
    }
}

#[test]
fn random_codeword_is_uniform() {
    let f = Field::prime(5).unwrap();
    let code = ReedSolomon::new(3, 2, &f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 10_000.0f64;
    let mut counts: HashMap<Vec<Fe>, u32> = HashMap::new();
    for _ in 0..draws as usize {
        *counts.entry(code.random_codeword(&mut rng)).or_default() += 1;
    }
    assert_eq!(counts.len(), 25);
    let expected = draws / 25.0;
    let sigma = (draws * (1.0 / 25.0) * (24.0 / 25.0)).sqrt();
    let mut chi2 = 0.0;
    for &c in counts.values() {
        assert!((c as f64 - expected).abs() <= 5.0 * sigma);
        chi2 += (c as f64 - expected).powi(2) / expected;
    }
    // 24 degrees of freedom; the 0.999 quantile is about 51.2.
    assert!(chi2 < 51.2, "chi2 = {chi2}");
}

proptest! {
    #[test]
    fn syndrome_is_linear_and_kills_codewords(seed in any::<u64>(), n in 3usize..12, kk in 1usize..11) {
        let k = kk.min(n);
        let f = Field::prime(13).unwrap();
        let code = ReedSolomon::new(n, k, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = code.random_codeword(&mut rng);
        let a: Vec<Fe> = (0..n).map(|_| f.random(&mut rng)).collect();
        let b: Vec<Fe> = (0..n).map(|_| f.random(&mut rng)).collect();
        let lam = f.random(&mut rng);
        prop_assert!(code.is_codeword(&c));
        prop_assert_eq!(code.syndrome(&f.add_vec(&a, &c)).unwrap(), code.syndrome(&a).unwrap());
        let lhs = code.syndrome(&f.add_vec(&a, &f.scale_vec(lam, &b))).unwrap();
        let rhs = f.add_vec(&code.syndrome(&a).unwrap(), &f.scale_vec(lam, &code.syndrome(&b).unwrap()));
        prop_assert_eq!(lhs, rhs);
    }
}
