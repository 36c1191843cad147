//! Finite fields `F_p` and `F_{p^m}` chosen at runtime.
//!
//! Elements are stored as their canonical index in `0..q`. For a prime field
//! the index is the residue itself; for an extension field it is the integer
//! whose base-`p` digits (least significant first) are the coefficients of the
//! element in the polynomial basis `1, x, x^2, ..., x^(m-1)`. The ordering of
//! indices is the canonical element ordering used wherever a "smallest"
//! element has to be picked.

use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(u64),
    #[error("modulus must be a monic polynomial of degree >= 1 with coefficients below {p}")]
    BadModulus { p: u32 },
    #[error("modulus polynomial is reducible over F_{p}")]
    Reducible { p: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element {value} does not belong to a field of order {order}")]
    ForeignElement { value: u32, order: u32 },
}

/// A field element, identified by its canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// A finite field of order `q = p^m`.
#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    p: u32,
    degree: u32,
    order: u32,
    /// Monic modulus, coefficients low to high (length `degree + 1`).
    /// For prime fields this is `x`.
    modulus: Vec<u32>,
    /// Modulus as a bit mask, only meaningful for `p == 2`.
    modulus_bits: u32,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{} mod {:?}", self.p, self.degree, self.modulus)
        }
    }
}

pub fn is_prime(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= v {
        if v % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, m)` with `q = p^m`, if possible.
fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let (mut rest, mut m) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

impl Field {
    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Field, FieldError> {
        if p > MAX_ORDER {
            return Err(FieldError::TooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Field {
            p: p as u32,
            degree: 1,
            order: p as u32,
            modulus: vec![0, 1],
            modulus_bits: 0,
        })
    }

    /// The extension field `F_p[x] / (modulus)`. The modulus is given low to
    /// high and must be monic and irreducible.
    pub fn extension(p: u64, modulus: &[u32]) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let p32 = p as u32;
        let degree = modulus.len().saturating_sub(1) as u32;
        if degree == 0 || modulus[degree as usize] != 1 || modulus.iter().any(|&c| c >= p32) {
            return Err(FieldError::BadModulus { p: p32 });
        }
        let order = p.checked_pow(degree).filter(|&q| q <= MAX_ORDER);
        let order = order.ok_or(FieldError::TooLarge(u64::MAX))?;
        if degree == 1 {
            return Field::prime(p);
        }
        if !poly::is_irreducible(modulus, p32) {
            return Err(FieldError::Reducible { p: p32 });
        }
        let modulus_bits = if p32 == 2 {
            modulus
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &c)| acc | (c << i))
        } else {
            0
        };
        Ok(Field {
            p: p32,
            degree,
            order: order as u32,
            modulus: modulus.to_vec(),
            modulus_bits,
        })
    }

    /// A field of order `q`, using the smallest monic irreducible modulus
    /// (in canonical coefficient order) when `q` is not prime.
    pub fn with_order(q: u64) -> Result<Field, FieldError> {
        if q > MAX_ORDER {
            return Err(FieldError::TooLarge(q));
        }
        let (p, m) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        if m == 1 {
            return Field::prime(p);
        }
        let modulus = poly::smallest_irreducible(p as u32, m);
        Field::extension(p, &modulus)
    }

    /// `F_{p^m}` with the smallest irreducible modulus of degree `m`.
    pub fn extension_of_degree(p: u64, m: u32) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let q = p.checked_pow(m).ok_or(FieldError::TooLarge(u64::MAX))?;
        Field::with_order(q)
    }

    /// The smallest prime field with more than `n` elements.
    pub fn smallest_prime_above(n: u64) -> Field {
        let mut p = n + 1;
        while !is_prime(p) {
            p += 1;
        }
        Field::prime(p).expect("prime by construction")
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `ceil(log2 q)`: bits needed to write one symbol.
    pub fn bits_per_symbol(&self) -> u32 {
        let q = self.order as u64;
        64 - (q - 1).leading_zeros()
    }

    #[inline]
    pub fn contains(&self, a: Fe) -> bool {
        a.0 < self.order
    }

    pub fn elem(&self, value: u32) -> Result<Fe, FieldError> {
        if value < self.order {
            Ok(Fe(value))
        } else {
            Err(FieldError::ForeignElement {
                value,
                order: self.order,
            })
        }
    }

    /// Embeds an integer through the prime subfield (reduction mod `p`).
    pub fn from_int(&self, v: i64) -> Fe {
        Fe(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.order).map(Fe)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (1..self.order).map(Fe)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(0..self.order))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(1..self.order))
    }

    /// Coefficients over `F_p` in the polynomial basis, low to high.
    pub fn coefficients(&self, a: Fe) -> Vec<u32> {
        let mut v = a.0;
        (0..self.degree)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }

    /// Inverse of [`Field::coefficients`]; missing high coefficients are zero.
    pub fn from_coefficients(&self, coeffs: &[u32]) -> Fe {
        debug_assert!(coeffs.len() <= self.degree as usize);
        Fe(coeffs
            .iter()
            .rev()
            .fold(0u32, |acc, &c| acc * self.p + c % self.p))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        debug_assert!(self.contains(a) && self.contains(b));
        if self.degree == 1 {
            let s = a.0 + b.0;
            Fe(if s >= self.p { s - self.p } else { s })
        } else if self.p == 2 {
            Fe(a.0 ^ b.0)
        } else {
            self.digitwise(a, b, |x, y| (x + y) % self.p)
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 || self.p == 2 {
            a
        } else if self.degree == 1 {
            Fe(self.p - a.0)
        } else {
            self.digitwise(Fe::ZERO, a, |_, y| (self.p - y) % self.p)
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        debug_assert!(self.contains(a) && self.contains(b));
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        if self.degree == 1 {
            Fe(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32)
        } else if self.p == 2 {
            self.mul_binary(a.0, b.0)
        } else {
            let prod = poly::mul(&self.coefficients(a), &self.coefficients(b), self.p);
            let rem = poly::rem(&prod, &self.modulus, self.p);
            self.from_coefficients(&rem[..rem.len().min(self.degree as usize)])
        }
    }

    fn mul_binary(&self, a: u32, b: u32) -> Fe {
        let mut acc: u64 = 0;
        let (a, mut b) = (a as u64, b);
        let mut shift = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a << shift;
            }
            b >>= 1;
            shift += 1;
        }
        let m = self.degree;
        let modulus = self.modulus_bits as u64;
        for bit in (m..64 - acc.leading_zeros()).rev() {
            if acc >> bit & 1 == 1 {
                acc ^= modulus << (bit - m);
            }
        }
        Fe(acc as u32)
    }

    fn digitwise(&self, a: Fe, b: Fe, f: impl Fn(u32, u32) -> u32) -> Fe {
        let (mut x, mut y) = (a.0, b.0);
        let (mut out, mut place) = (0u32, 1u32);
        for _ in 0..self.degree {
            out += f(x % self.p, y % self.p) * place;
            x /= self.p;
            y /= self.p;
            place = place.wrapping_mul(self.p);
        }
        Fe(out)
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let (mut base, mut acc) = (a, Fe::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// The Frobenius power `a^(p^i)`.
    pub fn frobenius(&self, a: Fe, i: u32) -> Fe {
        (0..i).fold(a, |x, _| self.pow(x, self.p as u64))
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(a, self.order as u64 - 2))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Checked arithmetic: validates membership of both operands first.
    pub fn arith(&self, op: ArithOp, a: Fe, b: Fe) -> Result<Fe, FieldError> {
        self.elem(a.0)?;
        self.elem(b.0)?;
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Sub => Ok(self.sub(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Div => self.div(a, b),
        }
    }

    /// `sum_i a_i b_i`.
    pub fn dot(&self, a: &[Fe], b: &[Fe]) -> Fe {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(Fe::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    pub fn add_vec(&self, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    pub fn scale_vec(&self, c: Fe, a: &[Fe]) -> Vec<Fe> {
        a.iter().map(|&x| self.mul(c, x)).collect()
    }

    /// `acc += c * a`, in place.
    pub fn axpy(&self, acc: &mut [Fe], c: Fe, a: &[Fe]) {
        debug_assert_eq!(acc.len(), a.len());
        if c.is_zero() {
            return;
        }
        for (x, &y) in acc.iter_mut().zip(a) {
            *x = self.add(*x, self.mul(c, y));
        }
    }

    /// Evaluates `sum_i coeffs[i] * x^i`.
    pub fn eval_poly(&self, coeffs: &[Fe], x: Fe) -> Fe {
        coeffs
            .iter()
            .rev()
            .fold(Fe::ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// JSON form of a symbol: an integer for prime fields, the coefficient
    /// list over `F_p` for extension fields.
    pub fn symbol_json(&self, a: Fe) -> serde_json::Value {
        if self.degree == 1 {
            serde_json::Value::from(a.0)
        } else {
            serde_json::Value::from(self.coefficients(a))
        }
    }
}

/// Dense polynomials over `F_p`, coefficients low to high.
pub(crate) mod poly {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p64 = p as u64;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p64;
            }
        }
        trim(out.into_iter().map(|c| c as u32).collect())
    }

    fn inv_mod(a: u32, p: u32) -> u32 {
        let (mut acc, mut base, mut e) = (1u64, a as u64, p as u64 - 2);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        acc as u32
    }

    /// Remainder of `a` modulo a nonzero `b`.
    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        let lead_inv = inv_mod(*b.last().expect("nonzero divisor"), p) as u64;
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = (*r.last().unwrap() as u64 * lead_inv) % p as u64;
            for (i, &bc) in b.iter().enumerate() {
                let sub = (c * bc as u64) % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            r = trim(r);
        }
        r
    }

    /// Monic polynomial of degree `deg` whose lower coefficients are the
    /// base-`p` digits of `index`.
    fn monic_from_index(mut index: u64, deg: u32, p: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(deg as usize + 1);
        for _ in 0..deg {
            out.push((index % p as u64) as u32);
            index /= p as u64;
        }
        out.push(1);
        out
    }

    /// Trial division by every monic polynomial of degree `1..=deg/2`.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let deg = (f.len() - 1) as u32;
        (1..=deg / 2).all(|d| {
            (0..(p as u64).pow(d)).all(|i| !rem(f, &monic_from_index(i, d, p), p).is_empty())
        })
    }

    pub fn smallest_irreducible(p: u32, deg: u32) -> Vec<u32> {
        (0..(p as u64).pow(deg))
            .map(|i| monic_from_index(i, deg, p))
            .find(|f| is_irreducible(f, p))
            .expect("irreducible polynomials exist in every degree")
    }
}
