//! Reed-Solomon codes and the privacy pair `(C, h)`.
//!
//! A code of length `n` and dimension `k` evaluates message polynomials of
//! degree `< k` at `n` distinct field points. Its parity-check matrix is the
//! generalized Vandermonde matrix `H[i][j] = v_j * a_j^i` with column
//! multipliers `v_j = 1 / prod_{l != j} (a_j - a_l)`.

use rand::Rng;
use thiserror::Error;

use crate::gf::{Fe, Field};
use crate::linalg::{self, Matrix};

/// A vector of `n` field symbols: a codeword, a received word or an error.
pub type Word = Vec<Fe>;
/// `H * w^T`, of length `n - k`.
pub type Syndrome = Vec<Fe>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("code length {n} needs more than {n} distinct nonzero points, field has order {q}")]
    LengthTooLarge { n: usize, q: u32 },
    #[error("dimension {k} out of range for length {n}")]
    DimensionOutOfRange { k: usize, n: usize },
    #[error("threshold t = {t} must be below n = {n}")]
    ThresholdTooLarge { t: usize, n: usize },
    #[error("evaluation points must be pairwise distinct")]
    RepeatedPoint,
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Operations shared by every linear block code used by the protocols.
pub trait LinearCode {
    fn field(&self) -> &Field;
    fn length(&self) -> usize;
    fn dimension(&self) -> usize;
    fn parity_check(&self) -> &Matrix;

    fn redundancy(&self) -> usize {
        self.length() - self.dimension()
    }

    fn syndrome(&self, w: &[Fe]) -> Result<Syndrome, CodeError> {
        if w.len() != self.length() {
            return Err(CodeError::LengthMismatch {
                expected: self.length(),
                got: w.len(),
            });
        }
        Ok(linalg::mat_vec(self.field(), self.parity_check(), w))
    }
}

pub fn hamming_weight(w: &[Fe]) -> usize {
    w.iter().filter(|x| !x.is_zero()).count()
}

pub fn support(w: &[Fe]) -> impl Iterator<Item = usize> + '_ {
    w.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, _)| i)
}

/// `y = codeword + error`, with the message polynomial behind `codeword`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub message: Vec<Fe>,
    pub codeword: Word,
    pub error: Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReedSolomon {
    field: Field,
    points: Vec<Fe>,
    k: usize,
    generator: Matrix,
    parity_check: Matrix,
}

impl ReedSolomon {
    /// `[n, k, n-k+1]` code on the `n` smallest nonzero field elements.
    pub fn new(n: usize, k: usize, field: &Field) -> Result<Self, CodeError> {
        if n as u64 >= field.order() as u64 {
            return Err(CodeError::LengthTooLarge {
                n,
                q: field.order(),
            });
        }
        let points = field.nonzero_elements().take(n).collect();
        Self::with_points(points, k, field)
    }

    pub fn with_points(points: Vec<Fe>, k: usize, field: &Field) -> Result<Self, CodeError> {
        let n = points.len();
        if k == 0 || k > n {
            return Err(CodeError::DimensionOutOfRange { k, n });
        }
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n {
            return Err(CodeError::RepeatedPoint);
        }
        let generator = (0..k)
            .map(|i| points.iter().map(|&a| field.pow(a, i as u64)).collect())
            .collect();
        let multipliers: Vec<Fe> = (0..n)
            .map(|j| {
                let prod = (0..n)
                    .filter(|&l| l != j)
                    .fold(Fe::ONE, |acc, l| field.mul(acc, field.sub(points[j], points[l])));
                field.inv(prod).expect("points are distinct")
            })
            .collect();
        let parity_check = (0..n - k)
            .map(|i| {
                points
                    .iter()
                    .zip(&multipliers)
                    .map(|(&a, &v)| field.mul(v, field.pow(a, i as u64)))
                    .collect()
            })
            .collect();
        Ok(ReedSolomon {
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

    pub fn min_distance(&self) -> usize {
        self.length() - self.k + 1
    }

    /// Unique-decoding radius `floor((d - 1) / 2)`.
    pub fn radius(&self) -> usize {
        (self.length() - self.k) / 2
    }

    /// The same message space evaluated on a subset of the points.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self, CodeError> {
        let points = keep.iter().map(|&i| self.points[i]).collect();
        Self::with_points(points, self.k, &self.field)
    }

    pub fn encode(&self, message: &[Fe]) -> Result<Word, CodeError> {
        if message.len() != self.k {
            return Err(CodeError::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        Ok(self
            .points
            .iter()
            .map(|&a| self.field.eval_poly(message, a))
            .collect())
    }

    /// Uniformly random codeword (uniform message, bijective encoding).
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Word {
        let message: Vec<Fe> = (0..self.k).map(|_| self.field.random(rng)).collect();
        self.encode(&message).expect("message has length k")
    }

    pub fn is_codeword(&self, w: &[Fe]) -> bool {
        self.syndrome(w)
            .map(|s| s.iter().all(|x| x.is_zero()))
            .unwrap_or(false)
    }

    /// Berlekamp-Welch decoding up to [`ReedSolomon::radius`] errors.
    ///
    /// Returns `None` when no codeword lies within the radius of `y`.
    ///
    /// # Panics
    /// If `y` does not have length `n`.
    pub fn decode(&self, y: &[Fe]) -> Option<Decomposition> {
        let n = self.length();
        assert_eq!(y.len(), n, "received word has wrong length");
        let f = &self.field;
        let tau = self.radius();
        let nq = self.k + tau;
        // Unknowns: q_0..q_{nq-1}, then e_0..e_{tau-1}; E is monic of degree tau.
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (&pt, &yi) in self.points.iter().zip(y) {
            let mut row = Vec::with_capacity(nq + tau);
            let mut pw = Fe::ONE;
            let mut powers = Vec::with_capacity(nq.max(tau) + 1);
            for _ in 0..=nq.max(tau) {
                powers.push(pw);
                pw = f.mul(pw, pt);
            }
            row.extend_from_slice(&powers[..nq]);
            row.extend(powers[..tau].iter().map(|&p| f.neg(f.mul(yi, p))));
            a.push(row);
            b.push(f.mul(yi, powers[tau]));
        }
        let sol = linalg::solve(f, &a, &b)?;
        let q_poly = &sol[..nq];
        let mut e_poly = sol[nq..].to_vec();
        e_poly.push(Fe::ONE);
        let (quot, rem) = poly_divmod(f, q_poly, &e_poly);
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        let mut message = quot;
        if message.iter().skip(self.k).any(|c| !c.is_zero()) {
            return None;
        }
        message.resize(self.k, Fe::ZERO);
        let codeword = self.encode(&message).ok()?;
        let error = f.sub_vec(y, &codeword);
        (hamming_weight(&error) <= tau).then_some(Decomposition {
            message,
            codeword,
            error,
        })
    }
}

impl LinearCode for ReedSolomon {
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

/// Quotient and remainder of polynomials with `Fe` coefficients (low to high).
fn poly_divmod(f: &Field, num: &[Fe], den: &[Fe]) -> (Vec<Fe>, Vec<Fe>) {
    let mut den = den.to_vec();
    while den.last().is_some_and(|c| c.is_zero()) {
        den.pop();
    }
    let dd = den.len() - 1;
    let lead_inv = f.inv(den[dd]).expect("nonzero divisor");
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        return (Vec::new(), rem);
    }
    let mut quot = vec![Fe::ZERO; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = f.mul(rem[i + dd], lead_inv);
        quot[i] = c;
        if !c.is_zero() {
            for (j, &dc) in den.iter().enumerate() {
                rem[i + j] = f.sub(rem[i + j], f.mul(c, dc));
            }
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

/// The vector `h` whose inner product with a random codeword stays uniform
/// given any `t` of its coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskVector {
    pub h: Vec<Fe>,
    /// Last entry of the parity row `(h, alpha)` of the length-`n+1` parent.
    pub alpha: Fe,
    /// The `[n+1, t+1]` code that `C` punctures.
    pub parent: ReedSolomon,
}

impl MaskVector {
    pub fn mask(&self, field: &Field, w: &[Fe]) -> Fe {
        field.dot(&self.h, w)
    }
}

/// Builds `C = [n, t+1, n-t]` together with its mask vector `h`.
///
/// The parent code has the `n` smallest nonzero points followed by the next
/// nonzero element (or zero if the field has no more nonzero elements); `h`
/// comes from the first parity row whose last entry is nonzero.
pub fn build_privacy_pair(
    n: usize,
    t: usize,
    field: &Field,
) -> Result<(ReedSolomon, MaskVector), CodeError> {
    if t >= n {
        return Err(CodeError::ThresholdTooLarge { t, n });
    }
    if n as u64 >= field.order() as u64 {
        return Err(CodeError::LengthTooLarge {
            n,
            q: field.order(),
        });
    }
    let mut points: Vec<Fe> = field.nonzero_elements().take(n + 1).collect();
    if points.len() == n {
        points.push(Fe::ZERO);
    }
    let parent = ReedSolomon::with_points(points, t + 1, field)?;
    let row = parent
        .parity_check()
        .iter()
        .find(|row| !row[n].is_zero())
        .expect("parent distance exceeds 1, so some parity row has a nonzero last entry");
    let mask = MaskVector {
        h: row[..n].to_vec(),
        alpha: row[n],
        parent: parent.clone(),
    };
    let code = parent.restrict(&(0..n).collect::<Vec<_>>())?;
    Ok((code, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[u32]) -> Vec<Fe> {
        xs.iter().map(|&x| Fe(x)).collect()
    }

    #[test]
    fn rs_3_2_over_f5() {
        let f = Field::prime(5).unwrap();
        let c = ReedSolomon::new(3, 2, &f).unwrap();
        assert_eq!(c.points(), &v(&[1, 2, 3])[..]);
        assert_eq!(c.encode(&v(&[1, 1])).unwrap(), v(&[2, 3, 4]));
        // a + bX with a = 0, b = 1
        assert_eq!(c.encode(&v(&[0, 1])).unwrap(), v(&[1, 2, 3]));
        assert_eq!(c.encode(&v(&[0, 0])).unwrap(), v(&[0, 0, 0]));
        assert_eq!(c.min_distance(), 2);
        let e = v(&[1, 0, 0]);
        let col0: Vec<Fe> = c.parity_check().iter().map(|r| r[0]).collect();
        assert_eq!(c.syndrome(&e).unwrap(), col0);
    }

    #[test]
    fn full_dimension_has_empty_parity_check() {
        let f = Field::prime(5).unwrap();
        let c = ReedSolomon::new(3, 3, &f).unwrap();
        assert_eq!(c.min_distance(), 1);
        assert!(c.parity_check().is_empty());
    }

    #[test]
    fn parameter_errors() {
        let f4 = Field::with_order(4).unwrap();
        assert_eq!(
            ReedSolomon::new(5, 3, &f4),
            Err(CodeError::LengthTooLarge { n: 5, q: 4 })
        );
        let f7 = Field::prime(7).unwrap();
        assert!(matches!(
            ReedSolomon::new(5, 6, &f7),
            Err(CodeError::DimensionOutOfRange { .. })
        ));
        assert!(matches!(
            build_privacy_pair(3, 3, &f7),
            Err(CodeError::ThresholdTooLarge { .. })
        ));
        let f5 = Field::prime(5).unwrap();
        assert!(matches!(
            build_privacy_pair(5, 2, &f5),
            Err(CodeError::LengthTooLarge { .. })
        ));
        let c = ReedSolomon::new(5, 3, &f7).unwrap();
        assert!(matches!(
            c.encode(&v(&[1])),
            Err(CodeError::LengthMismatch { expected: 3, got: 1 })
        ));
        assert!(c.syndrome(&v(&[1, 2])).is_err());
    }

    #[test]
    fn generator_orthogonal_to_parity_check() {
        for (q, n, k) in [(7, 5, 3), (13, 11, 6), (5, 4, 1), (8, 7, 4), (9, 8, 3)] {
            let f = Field::with_order(q).unwrap();
            let c = ReedSolomon::new(n, k, &f).unwrap();
            for g in c.generator() {
                assert!(c.is_codeword(g), "q={q} n={n} k={k}");
            }
        }
    }

    #[test]
    fn decode_examples() {
        let f = Field::prime(7).unwrap();
        let c = ReedSolomon::new(5, 3, &f).unwrap();
        let x = c.encode(&v(&[3, 1, 4])).unwrap();
        let d = c.decode(&x).unwrap();
        assert_eq!(d.codeword, x);
        assert_eq!(hamming_weight(&d.error), 0);
        let mut y = x.clone();
        y[2] = f.add(y[2], Fe(5));
        let d = c.decode(&y).unwrap();
        assert_eq!(d.codeword, x);
        assert_eq!(d.message, v(&[3, 1, 4]));
    }

    #[test]
    fn privacy_pair_parent_relation() {
        let f = Field::prime(7).unwrap();
        let (code, mask) = build_privacy_pair(5, 2, &f).unwrap();
        assert_eq!((code.length(), code.dimension(), code.min_distance()), (5, 3, 3));
        assert!(!mask.alpha.is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let parent_word = mask.parent.random_codeword(&mut rng);
            let x = &parent_word[..5];
            assert!(code.is_codeword(x));
            let expected = f.neg(f.mul(mask.alpha, parent_word[5]));
            assert_eq!(mask.mask(&f, x), expected);
        }
    }

    #[test]
    fn random_codeword_is_seeded() {
        let f = Field::prime(5).unwrap();
        let c = ReedSolomon::new(3, 2, &f).unwrap();
        let a = c.random_codeword(&mut ChaCha8Rng::seed_from_u64(9));
        let b = c.random_codeword(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(c.is_codeword(&a));
    }
}
