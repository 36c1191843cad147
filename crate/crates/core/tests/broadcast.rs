use std::collections::BTreeSet;

use proptest::prelude::*;
use psmt::broadcast::*;
use psmt::{Fe, Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn subsets(n: usize) -> impl Iterator<Item = BTreeSet<usize>> {
    (0u32..1 << n).map(move |b| (0..n).filter(|j| b >> j & 1 == 1).collect())
}

/// Every known-bad set `K` with `m <= |K| <= t`, every set `U` of at most
/// `t - |K|` further corrupted channels, every error value assignment.
#[test]
fn generalized_broadcast_exhaustive_n5() {
    let (n, t) = (5, 2);
    let f = Field::prime(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0u64;
    for m in 0..=t {
        let payload: Vec<Fe> = (0..m + 1).map(|_| f.random(&mut rng)).collect();
        let block = gen_broadcast_encode(m, &payload, &f, n).unwrap();
        assert_eq!(block.arrays.len(), 1);
        let sent = &block.arrays[0];
        for known in subsets(n).filter(|k| k.len() >= m && k.len() <= t) {
            for unknown in subsets(n).filter(|u| u.is_disjoint(&known) && u.len() <= t - known.len()) {
                let positions: Vec<usize> = known.iter().chain(&unknown).copied().collect();
                let mut values = vec![0u32; positions.len()];
                loop {
                    let mut y = sent.clone();
                    for (&j, &v) in positions.iter().zip(&values) {
                        y[j] = f.add(y[j], Fe(v));
                    }
                    let got = gen_broadcast_decode(m, &[y], &known, &f, n, payload.len()).unwrap();
                    assert_eq!(got, payload);
                    cases += 1;
                    // Next assignment, counting in base 7.
                    let mut i = 0;
                    loop {
                        if i == values.len() {
                            break;
                        }
                        values[i] += 1;
                        if values[i] < 7 {
                            break;
                        }
                        values[i] = 0;
                        i += 1;
                    }
                    if i == values.len() {
                        break;
                    }
                }
            }
        }
    }
    assert!(cases > 1000);
}

#[test]
fn generalized_broadcast_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [7usize, 9, 11] {
        let t = (n - 1) / 2;
        let f = Field::smallest_prime_above(n as u64);
        for _ in 0..3_000 {
            let m = rng.gen_range(0..=t);
            let s = rng.gen_range(1..4 * n);
            let payload: Vec<Fe> = (0..s).map(|_| f.random(&mut rng)).collect();
            let block = gen_broadcast_encode(m, &payload, &f, n).unwrap();
            assert_eq!(block.wire_symbols(), gen_broadcast_cost(m, s, n));
            let nk = rng.gen_range(m..=t);
            let known: BTreeSet<usize> = rand::seq::index::sample(&mut rng, n, nk).into_iter().collect();
            let others: Vec<usize> = (0..n).filter(|j| !known.contains(j)).collect();
            let nu = rng.gen_range(0..=t - nk);
            let unknown: Vec<usize> = rand::seq::index::sample(&mut rng, others.len(), nu)
                .into_iter()
                .map(|i| others[i])
                .collect();
            let arrays: Vec<Vec<Fe>> = block
                .arrays
                .iter()
                .map(|a| {
                    let mut y = a.clone();
                    for &j in known.iter().chain(&unknown) {
                        y[j] = f.random(&mut rng);
                    }
                    y
                })
                .collect();
            let got = gen_broadcast_decode(m, &arrays, &known, &f, n, s).unwrap();
            assert_eq!(got, payload, "n={n} m={m} K={known:?} U={unknown:?}");
        }
    }
}

#[test]
fn plain_broadcast_tolerates_minority() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = Field::prime(13).unwrap();
    for n in [3usize, 5, 7, 11] {
        let t = (n - 1) / 2;
        for _ in 0..500 {
            let payload: Vec<Fe> = (0..5).map(|_| f.random(&mut rng)).collect();
            let mut block = broadcast_encode(&payload, n);
            for a in block.arrays.iter_mut() {
                for j in rand::seq::index::sample(&mut rng, n, t) {
                    a[j] = f.random(&mut rng);
                }
            }
            assert_eq!(broadcast_decode(&block.arrays).unwrap(), payload);
        }
    }
}

proptest! {
    #[test]
    fn wire_cost_formula(s in 0usize..200, m in 0usize..5, n in 11usize..14) {
        let f = Field::prime(17).unwrap();
        let payload = vec![Fe(1); s];
        let block = gen_broadcast_encode(m, &payload, &f, n).unwrap();
        prop_assert_eq!(block.wire_symbols(), s.div_ceil(m + 1) * n);
        prop_assert_eq!(gen_broadcast_cost(m, s, n), s.div_ceil(m + 1) * n);
        prop_assert_eq!(block.padding, s.div_ceil(m + 1) * (m + 1) - s);
    }
}
