//! Finite computations over `SL_2(Z/q)` for square-free `q`.
//!
//! Composite moduli are handled prime by prime through the Chinese remainder
//! theorem. Densities are exact rationals; exponential sums are accumulated
//! in double precision in a fixed order.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_prime, mod_inverse, prime_divisors};
use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Largest modulus accepted by the enumerating routines unless overridden.
pub const DEFAULT_MODULUS_CAP: u64 = 120;

/// Renders a rational as `num/den`, always with an explicit denominator.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueMatrix {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub modulus: u64,
}

impl ResidueMatrix {
    pub fn trace(&self) -> u64 {
        (self.a + self.d) % self.modulus
    }

    pub fn det(&self) -> u64 {
        let q = self.modulus as u128;
        let ad = self.a as u128 * self.d as u128 % q;
        let bc = self.b as u128 * self.c as u128 % q;
        ((ad + q - bc) % q) as u64
    }

    /// Pairing with an integer 4-vector, `ax + by + cz + dw mod q`.
    pub fn pair(&self, s: &IntegerVector4) -> u64 {
        let q = self.modulus as i128;
        let v = self.a as i128 * s.x as i128
            + self.b as i128 * s.y as i128
            + self.c as i128 * s.z as i128
            + self.d as i128 * s.w as i128;
        v.rem_euclid(q) as u64
    }
}

/// An integer vector identified with the matrix `[[x, y], [z, w]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerVector4 {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub w: i64,
}

impl IntegerVector4 {
    pub fn new(x: i64, y: i64, z: i64, w: i64) -> Self {
        IntegerVector4 { x, y, z, w }
    }

    pub fn scale_mod(&self, k: i64, q: i64) -> IntegerVector4 {
        let f = |v: i64| ((v as i128 * k as i128).rem_euclid(q as i128)) as i64;
        IntegerVector4 { x: f(self.x), y: f(self.y), z: f(self.z), w: f(self.w) }
    }

    /// `gcd(x, y, z, w, q) = 1`.
    pub fn is_primitive_mod(&self, q: u64) -> bool {
        prime_divisors(q).into_iter().all(|p| {
            let p = p as i64;
            [self.x, self.y, self.z, self.w].iter().any(|v| v.rem_euclid(p) != 0)
        })
    }
}

fn check_squarefree(q: u64) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let f = factorize(q);
    if f.iter().any(|&(_, e)| e > 1) {
        return Err(Error::NotSquareFree(q));
    }
    Ok(f.into_iter().map(|(p, _)| p).collect())
}

fn check_cap(q: u64, cap: u64) -> Result<()> {
    if q > cap {
        return Err(Error::CapExceeded { what: "modulus", cap });
    }
    Ok(())
}

/// `|SL_2(Z/q)| = q^3 prod_{p | q} (1 - 1/p^2)`.
pub fn sl2_order(q: u64) -> Result<u64> {
    let primes = check_squarefree(q)?;
    Ok(primes.iter().map(|&p| p * (p * p - 1)).product())
}

/// Elements of `SL_2(F_p)`, first column then second, in a fixed order.
fn sl2_prime(p: u64) -> Vec<[u64; 4]> {
    let mut out = Vec::with_capacity((p * (p * p - 1)) as usize);
    for a in 0..p {
        for c in 0..p {
            if a == 0 && c == 0 {
                continue;
            }
            if a != 0 {
                let a_inv = mod_inverse(a as i64, p as i64).unwrap() as u64;
                for b in 0..p {
                    let d = (1 + b * c) % p * a_inv % p;
                    out.push([a, b, c, d]);
                }
            } else {
                let c_inv = mod_inverse(c as i64, p as i64).unwrap() as u64;
                let b = (p - c_inv) % p;
                for d in 0..p {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// Iterator over `SL_2(Z/q)`, assembled from the prime factors by CRT.
pub struct Sl2Iter {
    modulus: u64,
    factors: Vec<Vec<[u64; 4]>>,
    idempotents: Vec<u64>,
    cursor: Vec<usize>,
    done: bool,
}

impl Iterator for Sl2Iter {
    type Item = ResidueMatrix;

    fn next(&mut self) -> Option<ResidueMatrix> {
        if self.done {
            return None;
        }
        let q = self.modulus as u128;
        let mut entries = [0u128; 4];
        for (k, &i) in self.cursor.iter().enumerate() {
            let e = self.idempotents[k] as u128;
            for (slot, &v) in entries.iter_mut().zip(self.factors[k][i].iter()) {
                *slot = (*slot + v as u128 * e) % q;
            }
        }
        // odometer, last factor fastest
        let mut k = self.cursor.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cursor[k] += 1;
            if self.cursor[k] < self.factors[k].len() {
                break;
            }
            self.cursor[k] = 0;
        }
        let [a, b, c, d] = entries.map(|v| v as u64);
        Some(ResidueMatrix { a, b, c, d, modulus: self.modulus })
    }
}

pub fn sl2_enumerate(q: u64) -> Result<Sl2Iter> {
    sl2_enumerate_with_cap(q, DEFAULT_MODULUS_CAP)
}

pub fn sl2_enumerate_with_cap(q: u64, cap: u64) -> Result<Sl2Iter> {
    let primes = check_squarefree(q)?;
    check_cap(q, cap)?;
    let idempotents = primes
        .iter()
        .map(|&p| {
            let m = q / p;
            m * mod_inverse((m % p) as i64, p as i64).unwrap() as u64 % q
        })
        .collect();
    let factors: Vec<_> = primes.iter().map(|&p| sl2_prime(p)).collect();
    let cursor = vec![0; factors.len()];
    // q = 1 yields the single matrix of the zero ring
    Ok(Sl2Iter { modulus: q, factors, idempotents, cursor, done: false })
}

fn beta_prime(p: u64) -> Rational {
    let p = p as i128;
    let lead = if p == 2 { 1 } else { 2 };
    Rational::new(lead, p) * (Rational::from_integer(1) + Rational::new(1, p * p - 1))
}

/// The multiplicative density of `q | tr^2 - 4` on `SL_2(Z/q)`.
pub fn beta(q: u64) -> Result<Rational> {
    let primes = check_squarefree(q)?;
    Ok(primes.into_iter().map(beta_prime).product())
}

fn require_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

/// Exhaustive proportion of `SL_2(F_p)` with `tr^2 = 4`.
pub fn beta_bruteforce(p: u64) -> Result<Rational> {
    require_prime(p)?;
    let mut hits = 0i128;
    let mut total = 0i128;
    for g in sl2_enumerate(p)? {
        let t = g.trace();
        if (t * t) % p == 4 % p {
            hits += 1;
        }
        total += 1;
    }
    Ok(Rational::new(hits, total))
}

/// Number of `t mod q` with `t^2 = 4`, by direct search.
pub fn sqrt4_count(q: u64) -> Result<u64> {
    check_squarefree(q)?;
    let q128 = q as u128;
    Ok((0..q).filter(|&t| (t as u128 * t as u128) % q128 == 4 % q128).count() as u64)
}

/// `2^(nu(q) - [2 | q])`.
pub fn sqrt4_count_closed_form(q: u64) -> Result<u64> {
    let primes = check_squarefree(q)?;
    let nu = primes.len() as u32 - u32::from(q.is_multiple_of(2));
    Ok(1 << nu)
}

/// `#{g in SL_2(F_p) : tr g = t}` by enumeration.
pub fn trace_fiber_count(p: u64, t: i64) -> Result<u64> {
    require_prime(p)?;
    let t = t.rem_euclid(p as i64) as u64;
    Ok(sl2_enumerate(p)?.filter(|g| g.trace() == t).count() as u64)
}

/// `(p #{tr = t} - |SL_2(F_p)|) / |SL_2(F_p)|`, the normalized complete sum
/// of `e_p(r (tr g - t))` over `g` and nonzero `r`.
pub fn rho_t_bruteforce(p: u64, t: i64) -> Result<Rational> {
    let fiber = trace_fiber_count(p, t)? as i128;
    let order = sl2_order(p)? as i128;
    Ok(Rational::new(p as i128 * fiber - order, order))
}

fn phase_table(q: u64) -> Vec<Complex64> {
    (0..q).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64)).collect()
}

/// `K(a, b; p) = sum_{x != 0} e_p(ax + b/x)`, real by symmetry.
pub fn kloosterman(a: i64, b: i64, p: u64) -> Result<f64> {
    require_prime(p)?;
    let pi = p as i64;
    if a.rem_euclid(pi) == 0 || b.rem_euclid(pi) == 0 {
        return Err(Error::DegenerateKloosterman);
    }
    let table = phase_table(p);
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..pi {
        let x_inv = mod_inverse(x, pi).unwrap();
        let k = (a as i128 * x as i128 + b as i128 * x_inv as i128).rem_euclid(pi as i128);
        acc += table[k as usize];
    }
    Ok(acc.re)
}

/// `sum_{g in SL_2(Z/q)} e_q(g . s)` by direct enumeration of the group.
pub fn sl2_charsum_direct(q: u64, s: &IntegerVector4) -> Result<Complex64> {
    let table = phase_table(q);
    let mut acc = Complex64::new(0.0, 0.0);
    for g in sl2_enumerate(q)? {
        acc += table[g.pair(s) as usize];
    }
    Ok(acc)
}

/// Same sum, factored over the primes of `q`: with `m = q/p`,
/// `e_q(u) = prod_p e_p(u * m^{-1})`.
pub fn sl2_charsum(q: u64, s: &IntegerVector4) -> Result<Complex64> {
    let primes = check_squarefree(q)?;
    check_cap(q, DEFAULT_MODULUS_CAP)?;
    let mut acc = Complex64::new(1.0, 0.0);
    for p in primes {
        let m = q / p;
        let m_inv = mod_inverse((m % p) as i64, p as i64).unwrap();
        let local = s.scale_mod(m_inv, p as i64);
        acc *= sl2_charsum_direct(p, &local)?;
    }
    Ok(acc)
}
