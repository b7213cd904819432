//! Sifting the sequence `tr(g)^2 - 4`: congruence counts against the local
//! density `beta`, direct almost-prime and square-free censuses, and the
//! discriminants realized by low-lying geodesics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, is_squarefree, isqrt, primes_up_to};
use crate::cf::{word_to_matrix, Word};
use crate::error::{Error, Result};
use crate::forms::{cycle, matrix_to_form, reduce, FormCycle};
use crate::modular::{beta, fmt_rational, Rational};
use crate::semigroup::{
    count_ball_capped, count_ball_within, cyclic_classes, for_each_in_ball, trace_histogram, BilinearSet, NormBound,
    Parity,
};

/// Largest `T = t_max^2` accepted by the discriminant census.
pub const DISCRIMINANT_T_CAP: u64 = 100_000_000;
/// Largest sifting source, counted with multiplicity.
pub const SIFTING_CAP: u64 = 20_000_000;

/// The multiset `{tr^2 - 4}`, kept as value -> multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SiftingSequence {
    pub values: BTreeMap<u128, u64>,
    pub source_size: u64,
    /// Norm parameter of the source, when it came from a ball.
    pub norm: Option<f64>,
}

impl SiftingSequence {
    pub fn from_traces<I: IntoIterator<Item = i128>>(traces: I) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut size = 0u64;
        for t in traces {
            if t.abs() < 2 {
                return Err(Error::InvalidArgument(format!("trace {t} is not hyperbolic")));
            }
            *values.entry((t * t - 4) as u128).or_insert(0) += 1;
            size += 1;
        }
        if size == 0 {
            return Err(Error::InvalidArgument("empty sifting source".into()));
        }
        Ok(SiftingSequence { values, source_size: size, norm: None })
    }

    pub fn from_words(words: &[Word]) -> Result<Self> {
        let traces: Result<Vec<i128>> = words.iter().map(|w| Ok(word_to_matrix(w)?.trace())).collect();
        Self::from_traces(traces?)
    }

    /// Traces over `Gamma_A` intersected with the closed ball of radius `n`.
    pub fn from_ball(alphabet: u64, n: f64) -> Result<Self> {
        let bound = NormBound::closed(n);
        count_ball_capped(alphabet, bound, Parity::Even, SIFTING_CAP).map_err(|e| match e {
            Error::CapExceeded { cap, .. } => {
                Error::CapExceeded { what: "sifting source size (shard the ball by prefix)", cap }
            }
            e => e,
        })?;
        let mut traces = Vec::new();
        for_each_in_ball(alphabet, bound, Parity::Even, |_, m| traces.push(m.trace()))?;
        let mut seq = Self::from_traces(traces)?;
        seq.norm = Some(n);
        Ok(seq)
    }

    pub fn from_bilinear(pi: &BilinearSet) -> Result<Self> {
        if pi.len() > SIFTING_CAP {
            return Err(Error::CapExceeded {
                what: "sifting source size (shard the bilinear set)",
                cap: SIFTING_CAP,
            });
        }
        let mut traces = Vec::with_capacity(pi.len() as usize);
        pi.for_each_trace(|t| traces.push(t));
        Self::from_traces(traces)
    }

    pub fn len(&self) -> u64 {
        self.source_size
    }

    pub fn is_empty(&self) -> bool {
        self.source_size == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (u128, u64)> + '_ {
        self.values.iter().map(|(&v, &m)| (v, m))
    }
}

/// `|A_q|`, the number of terms divisible by `q`.
pub fn a_q(seq: &SiftingSequence, q: u64) -> Result<u64> {
    if q == 0 || !is_squarefree(q) {
        return Err(Error::NotSquareFree(q));
    }
    Ok(seq.iter().filter(|(n, _)| n % q as u128 == 0).map(|(_, m)| m).sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub q: u64,
    pub count: u64,
    pub expected: Rational,
    pub remainder: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemainderProfile {
    pub rows: Vec<RemainderRow>,
    pub source_size: u64,
    pub cutoff: u64,
    /// `sum |r(q)| / |Pi|`.
    pub summary: Rational,
}

impl RemainderProfile {
    pub fn summary_f64(&self) -> f64 {
        *self.summary.numer() as f64 / *self.summary.denom() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,count,expected,remainder,remainder_f64\n");
        for r in &self.rows {
            let rf = *r.remainder.numer() as f64 / *r.remainder.denom() as f64;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.q,
                r.count,
                fmt_rational(&r.expected),
                fmt_rational(&r.remainder),
                rf
            ));
        }
        out
    }
}

/// Rows for every square-free `2 <= q < cutoff`.
pub fn remainder_profile(seq: &SiftingSequence, cutoff: u64) -> Result<RemainderProfile> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
    }
    let size = Rational::from_integer(seq.source_size as i128);
    let mut rows = Vec::new();
    let mut total = Rational::from_integer(0);
    for q in (2..cutoff).filter(|&q| is_squarefree(q)) {
        let count = a_q(seq, q)?;
        let expected = beta(q)? * size;
        let remainder = Rational::from_integer(count as i128) - expected;
        total += if remainder < Rational::from_integer(0) { -remainder } else { remainder };
        rows.push(RemainderRow { q, count, expected, remainder });
    }
    Ok(RemainderProfile { rows, source_size: seq.source_size, cutoff, summary: total / size })
}

/// Terms with no prime factor `<= z`.
pub fn almost_prime_census(seq: &SiftingSequence, z: u64) -> u64 {
    let primes = primes_up_to(z);
    seq.iter()
        .filter(|(n, _)| primes.iter().all(|&p| n % p as u128 != 0))
        .map(|(_, m)| m)
        .sum()
}

/// Whether `t^2 - 4` is square-free, checked on `t - 2` and `t + 2`.
pub fn trace_discriminant_squarefree(t: u64) -> bool {
    // an even t puts 4 | t^2 - 4; for odd t the two factors are coprime
    t >= 3 && t % 2 == 1 && is_squarefree(t - 2) && is_squarefree(t + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SquarefreeCensus {
    pub alphabet: u64,
    pub norm: f64,
    pub ball_count: u64,
    pub squarefree_count: u64,
}

impl SquarefreeCensus {
    pub fn fraction(&self) -> Rational {
        Rational::new(self.squarefree_count as i128, self.ball_count.max(1) as i128)
    }
}

/// Elements of `Gamma_A` in the closed ball of radius `n` with `tr^2 - 4` square-free.
pub fn squarefree_trace_census(alphabet: u64, n: f64) -> Result<SquarefreeCensus> {
    let mut by_trace: BTreeMap<u64, u64> = BTreeMap::new();
    let mut ball_count = 0u64;
    count_ball_within(alphabet, NormBound::closed(n), Parity::Even)?;
    for_each_in_ball(alphabet, NormBound::closed(n), Parity::Even, |_, m| {
        *by_trace.entry(m.trace() as u64).or_insert(0) += 1;
        ball_count += 1;
    })?;
    let squarefree_count = by_trace
        .iter()
        .filter(|(&t, _)| trace_discriminant_squarefree(t))
        .map(|(_, &c)| c)
        .sum();
    Ok(SquarefreeCensus { alphabet, norm: n, ball_count, squarefree_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminantRow {
    pub t: u64,
    pub d: u64,
    pub multiplicity: u64,
}

/// Traces `t <= sqrt(T)` with `t^2 - 4` square-free and `M_A(t) >= m(t)`.
pub fn discriminant_census<F: Fn(u64) -> u64>(alphabet: u64, t_cap: u64, m: F) -> Result<Vec<DiscriminantRow>> {
    if t_cap > DISCRIMINANT_T_CAP {
        return Err(Error::CapExceeded { what: "discriminant bound T", cap: DISCRIMINANT_T_CAP });
    }
    let t_max = isqrt(t_cap as u128) as u64;
    if t_max < 3 {
        return Ok(Vec::new());
    }
    let hist = trace_histogram(alphabet, t_max)?;
    Ok((3..=t_max)
        .filter(|&t| trace_discriminant_squarefree(t))
        .map(|t| DiscriminantRow { t, d: t * t - 4, multiplicity: hist[t as usize] })
        .filter(|row| row.multiplicity > 0 && row.multiplicity >= m(row.t))
        .collect())
}

pub fn discriminant_csv(rows: &[DiscriminantRow]) -> String {
    let mut out = String::from("t,D,multiplicity\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.t, r.d, r.multiplicity));
    }
    out
}

/// The trace `t` with `t^2 - 4 = d`, if any.
pub fn trace_of_discriminant(d: u64) -> Option<u64> {
    let t = isqrt(d as u128 + 4) as u64;
    (t * t == d + 4).then_some(t)
}

/// Form classes of discriminant `d = t^2 - 4` realized by trace-`t` words over `[1, A]`.
pub fn class_census(d: u64, alphabet: u64) -> Result<Vec<FormCycle>> {
    let t = trace_of_discriminant(d)
        .ok_or_else(|| Error::InvalidArgument(format!("{d} is not of the form t^2 - 4")))?;
    if !factorize(d).iter().all(|&(_, e)| e == 1) {
        return Err(Error::NotSquareFree(d));
    }
    let mut cycles: Vec<FormCycle> = Vec::new();
    for w in cyclic_classes(alphabet, t)? {
        let f = reduce(&matrix_to_form(&word_to_matrix(&w)?)?);
        let cy = cycle(&f)?;
        if cycles.iter().any(|c| c.contains(&f)) {
            return Err(Error::Internal(format!("word class {w} repeats a form cycle")));
        }
        cycles.push(cy);
    }
    cycles.sort_by_key(|c| c.key());
    Ok(cycles)
}
