//! Continued fractions of quadratic irrationals and the word/matrix dictionary.
//!
//! A word `(a_1, ..., a_k)` of positive partial quotients corresponds to the
//! product of generators `[[a_1, 1], [1, 0]] ... [[a_k, 1], [1, 0]]`, whose
//! entries are the continuants of the word. Even words have determinant one;
//! when hyperbolic their attracting fixed point is a reduced quadratic
//! irrational with purely periodic expansion equal to the word.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{is_square, isqrt, surd_sign};
use crate::error::{Error, Result};

/// A finite sequence of partial quotients, every digit at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u64>);

impl Word {
    pub fn new(digits: Vec<u64>) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d == 0) {
            return Err(Error::DigitOutOfRange { digit: d, bound: u64::MAX });
        }
        Ok(Word(digits))
    }

    /// Like [`Word::new`] but also enforces `digit <= bound`.
    pub fn with_alphabet(digits: Vec<u64>, bound: u64) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d == 0 || d > bound) {
            return Err(Error::DigitOutOfRange { digit: d, bound });
        }
        Ok(Word(digits))
    }

    pub(crate) fn from_digits_unchecked(digits: Vec<u64>) -> Self {
        debug_assert!(digits.iter().all(|&d| d >= 1));
        Word(digits)
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.0.len().is_multiple_of(2)
    }

    pub fn max_digit(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Left rotation by `k` places.
    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        Word(v)
    }

    pub fn rotations(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.len().max(1)).map(move |k| self.rotate(k))
    }

    /// The lexicographically least rotation.
    pub fn canonical_rotation(&self) -> Word {
        self.rotations().min().unwrap_or_else(|| self.clone())
    }

    pub fn is_rotation_of(&self, other: &Word) -> bool {
        self.len() == other.len() && self.canonical_rotation() == other.canonical_rotation()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The word repeated twice; turns an odd period into a determinant-one word.
    pub fn doubled(&self) -> Word {
        self.concat(self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad digit {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(digits)
    }
}

/// A 2x2 integer matrix of determinant +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnimodularMatrix {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl UnimodularMatrix {
    pub const IDENTITY: UnimodularMatrix = UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 };

    /// Builds a matrix, rejecting determinants other than +1 or -1.
    pub fn new(a: i128, b: i128, c: i128, d: i128) -> Result<Self> {
        let m = UnimodularMatrix { a, b, c, d };
        match m.det() {
            1 | -1 => Ok(m),
            other => Err(Error::InvalidArgument(format!("determinant {other} is not +-1"))),
        }
    }

    pub fn generator(digit: u64) -> Self {
        UnimodularMatrix { a: digit as i128, b: 1, c: 1, d: 0 }
    }

    pub fn det(&self) -> i128 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> i128 {
        self.a + self.d
    }

    /// Squared Frobenius norm, `tr(g g^t)`.
    pub fn norm_sq(&self) -> i128 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// `None` when some term does not fit in `u128`.
    pub fn checked_norm_sq(&self) -> Option<u128> {
        [self.a, self.b, self.c, self.d].iter().try_fold(0u128, |acc, &x| {
            let x = x.unsigned_abs();
            x.checked_mul(x).and_then(|sq| acc.checked_add(sq))
        })
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        let dot = |x: i128, y: i128, z: i128, w: i128| {
            x.checked_mul(y)
                .and_then(|p| z.checked_mul(w).and_then(|q| p.checked_add(q)))
                .ok_or(Error::Overflow("matrix product"))
        };
        Ok(UnimodularMatrix {
            a: dot(self.a, rhs.a, self.b, rhs.c)?,
            b: dot(self.a, rhs.b, self.b, rhs.d)?,
            c: dot(self.c, rhs.a, self.d, rhs.c)?,
            d: dot(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    /// Right multiplication by a generator; the hot path of enumeration.
    #[inline]
    pub fn times_generator(&self, digit: u64) -> Self {
        let x = digit as i128;
        UnimodularMatrix { a: self.a * x + self.b, b: self.a, c: self.c * x + self.d, d: self.c }
    }

    pub fn checked_times_generator(&self, digit: u64) -> Option<Self> {
        let x = digit as i128;
        let a = self.a.checked_mul(x)?.checked_add(self.b)?;
        let c = self.c.checked_mul(x)?.checked_add(self.d)?;
        Some(UnimodularMatrix { a, b: self.a, c, d: self.c })
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2
    }

    /// Möbius action `z -> (az + b)/(cz + d)` on a float, for sanity checks.
    pub fn act(&self, z: f64) -> f64 {
        (self.a as f64 * z + self.b as f64) / (self.c as f64 * z + self.d as f64)
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// The exact surd `(p + sqrt(d)) / q` with `q | d - p^2` and `d` not a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticIrrational {
    pub p: i128,
    pub q: i128,
    pub d: i128,
}

impl QuadraticIrrational {
    pub fn new(p: i128, q: i128, d: i128) -> Result<Self> {
        if d <= 0 || is_square(d) {
            return Err(Error::SquareDiscriminant(d));
        }
        if q == 0 || (d - p * p) % q != 0 {
            return Err(Error::UnnormalizedSurd { p, q, d });
        }
        Ok(QuadraticIrrational { p, q, d })
    }

    /// `(p - sqrt(d)) / q`, stored as `(-p + sqrt(d)) / -q`.
    pub fn galois_conjugate(&self) -> Self {
        QuadraticIrrational { p: -self.p, q: -self.q, d: self.d }
    }

    pub fn to_f64(&self) -> f64 {
        (self.p as f64 + (self.d as f64).sqrt()) / self.q as f64
    }

    /// Exact sign of `self - n` for an integer `n`.
    pub fn cmp_integer(&self, n: i128) -> std::cmp::Ordering {
        // (p + sqrt d)/q - n = ((p - n q) + sqrt d)/q
        let s = surd_sign(self.p - n * self.q, 1, self.d) * self.q.signum() as i32;
        s.cmp(&0)
    }

    /// `x > 1` and the conjugate lies strictly inside `(-1, 0)`.
    pub fn is_reduced(&self) -> bool {
        use std::cmp::Ordering::*;
        let conj = self.galois_conjugate();
        self.cmp_integer(1) == Greater && conj.cmp_integer(0) == Less && conj.cmp_integer(-1) == Greater
    }

    /// Integer part, computed exactly.
    pub fn floor(&self) -> i128 {
        let s = isqrt(self.d as u128) as i128;
        if self.q > 0 {
            Integer::div_floor(&(self.p + s), &self.q)
        } else {
            // (p + sqrt d)/q = -(p + sqrt d)/|q| and the value is irrational
            -Integer::div_floor(&(self.p + s), &(-self.q)) - 1
        }
    }

    /// Expansion as `(preperiod, period)`; the preperiod may carry a
    /// non-positive leading term.
    pub fn cf_expand(&self) -> Result<CfExpansion> {
        let QuadraticIrrational { mut p, mut q, d } = *self;
        if q == 0 || (d - p * p) % q != 0 {
            return Err(Error::UnnormalizedSurd { p, q, d });
        }
        if d <= 0 || is_square(d) {
            return Err(Error::SquareDiscriminant(d));
        }
        let mut seen: HashMap<(i128, i128), usize> = HashMap::new();
        let mut digits: Vec<i128> = Vec::new();
        loop {
            if let Some(&start) = seen.get(&(p, q)) {
                let preperiod = digits[..start].to_vec();
                let period = digits[start..].iter().map(|&a| a as u64).collect();
                return Ok(CfExpansion { preperiod, period: Word::from_digits_unchecked(period) });
            }
            seen.insert((p, q), digits.len());
            let a = QuadraticIrrational { p, q, d }.floor();
            digits.push(a);
            let p_next = a * q - p;
            let q_next = (d - p_next * p_next) / q;
            p = p_next;
            q = q_next;
        }
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+sqrt({}))/{}", self.p, self.d, self.q)
    }
}

impl FromStr for QuadraticIrrational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected (P+sqrt(D))/Q, got {s:?}"));
        let s = s.trim();
        let rest = s.strip_prefix('(').ok_or_else(bad)?;
        let (p, rest) = rest.split_once("+sqrt(").ok_or_else(bad)?;
        let (d, q) = rest.split_once("))/").ok_or_else(bad)?;
        let parse = |t: &str| t.trim().parse::<i128>().map_err(|_| bad());
        QuadraticIrrational::new(parse(p)?, parse(q)?, parse(d)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfExpansion {
    pub preperiod: Vec<i128>,
    pub period: Word,
}

/// Product of the generators of `w`, left to right.
pub fn word_to_matrix(w: &Word) -> Result<UnimodularMatrix> {
    let mut digits = w.digits().iter();
    let first = *digits.next().ok_or(Error::EmptyWord)?;
    let mut m = UnimodularMatrix::generator(first);
    for &a in digits {
        let x = i128::from(a);
        m = UnimodularMatrix {
            a: m.a.checked_mul(x).and_then(|v| v.checked_add(m.b)).ok_or(Error::Overflow("word_to_matrix"))?,
            b: m.a,
            c: m.c.checked_mul(x).and_then(|v| v.checked_add(m.d)).ok_or(Error::Overflow("word_to_matrix"))?,
            d: m.c,
        };
    }
    Ok(m)
}

/// Attracting fixed point `(a - d + sqrt(tr^2 - 4)) / 2c` of a hyperbolic matrix.
pub fn fixed_point(m: &UnimodularMatrix) -> Result<QuadraticIrrational> {
    let det = m.det();
    if det != 1 {
        return Err(Error::DeterminantNotOne(det));
    }
    let t = m.trace();
    if t.abs() <= 2 {
        return Err(Error::NotHyperbolic(t.abs()));
    }
    if m.c == 0 {
        return Err(Error::FixedPointAtInfinity);
    }
    let disc = t.checked_mul(t).ok_or(Error::Overflow("trace squared"))? - 4;
    QuadraticIrrational::new(m.a - m.d, 2 * m.c, disc)
}

pub fn cf_expand(x: &QuadraticIrrational) -> Result<CfExpansion> {
    x.cf_expand()
}

pub fn is_reduced(x: &QuadraticIrrational) -> bool {
    x.is_reduced()
}

pub fn galois_conjugate(x: &QuadraticIrrational) -> QuadraticIrrational {
    x.galois_conjugate()
}
