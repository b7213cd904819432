//! The thin semigroup of continuant matrices with bounded partial quotients.
//!
//! Every enumeration here is a depth-first walk of the free monoid on the
//! generators `[[a, 1], [1, 0]]`, `1 <= a <= alphabet`. Appending a generator
//! strictly increases the Frobenius norm and the quantity `a + b + c` bounds
//! the trace of every extension from below, so both walks prune safely.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{word_to_matrix, UnimodularMatrix, Word};
use crate::error::{Error, Result};
use crate::modular::{sl2_enumerate, sl2_order};

/// Largest number of elements any materializing enumeration may return.
pub const DEFAULT_ELEMENT_CAP: u64 = 5_000_000;
/// Largest trace accepted by fiber enumeration.
pub const TRACE_CAP: u64 = 1_000_000;
/// Largest ball any counting walk will traverse.
pub const COUNT_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemigroupElement {
    pub word: Word,
    pub matrix: UnimodularMatrix,
}

impl SemigroupElement {
    pub fn from_word(word: Word) -> Result<Self> {
        let matrix = word_to_matrix(&word)?;
        Ok(SemigroupElement { word, matrix })
    }

    pub fn trace(&self) -> i128 {
        self.matrix.trace()
    }

    pub fn norm_sq(&self) -> i128 {
        self.matrix.norm_sq()
    }

    /// `{"word":[..],"matrix":[[a,b],[c,d]],"trace":t,"normSq":n}`
    pub fn to_json_line(&self) -> String {
        let m = &self.matrix;
        format!(
            "{{\"word\":[{}],\"matrix\":[[{},{}],[{},{}]],\"trace\":{},\"normSq\":{}}}",
            self.word,
            m.a,
            m.b,
            m.c,
            m.d,
            self.trace(),
            self.norm_sq()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Any,
}

impl Parity {
    fn admits(self, len: usize) -> bool {
        match self {
            Parity::Even => len.is_multiple_of(2),
            Parity::Any => true,
        }
    }
}

/// A bound on the squared Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormBound {
    max_norm_sq: u128,
}

impl NormBound {
    /// `||g|| <= n`.
    pub fn closed(n: f64) -> Self {
        let sq = n * n;
        let k = sq.round();
        let max = if (sq - k).abs() <= 1e-9 * sq.max(1.0) { k } else { sq.floor() };
        NormBound { max_norm_sq: max.max(0.0) as u128 }
    }

    /// `||g|| < n`.
    pub fn open(n: f64) -> Self {
        let sq = n * n;
        let k = sq.round();
        let max = if (sq - k).abs() <= 1e-9 * sq.max(1.0) { k - 1.0 } else { sq.floor() };
        NormBound { max_norm_sq: max.max(0.0) as u128 }
    }

    pub fn from_norm_sq(max_norm_sq: u128) -> Self {
        NormBound { max_norm_sq }
    }

    pub fn max_norm_sq(&self) -> u128 {
        self.max_norm_sq
    }

    #[inline]
    fn admits(&self, m: &UnimodularMatrix) -> bool {
        m.checked_norm_sq().is_some_and(|n| n <= self.max_norm_sq)
    }
}

fn check_alphabet(alphabet: u64) -> Result<()> {
    if alphabet == 0 {
        return Err(Error::InvalidArgument("alphabet bound must be at least 1".into()));
    }
    Ok(())
}

/// Returns `false` once `visit` asks to stop.
fn walk_ball<F: FnMut(&[u64], &UnimodularMatrix) -> bool>(
    alphabet: u64,
    bound: NormBound,
    parity: Parity,
    word: &mut Vec<u64>,
    m: UnimodularMatrix,
    visit: &mut F,
) -> bool {
    if parity.admits(word.len()) && !visit(word, &m) {
        return false;
    }
    for digit in 1..=alphabet {
        // norm is increasing in the digit as well
        let Some(child) = m.checked_times_generator(digit).filter(|c| bound.admits(c)) else {
            break;
        };
        word.push(digit);
        let more = walk_ball(alphabet, bound, parity, word, child, visit);
        word.pop();
        if !more {
            return false;
        }
    }
    true
}

/// Roots of the shards: all admissible words of length two, in order.
fn prefix_shards(alphabet: u64, bound: NormBound) -> Vec<(Vec<u64>, UnimodularMatrix)> {
    let mut out = Vec::new();
    for x in 1..=alphabet {
        let mx = UnimodularMatrix::generator(x);
        for y in 1..=alphabet {
            let m = mx.times_generator(y);
            if bound.admits(&m) {
                out.push((vec![x, y], m));
            }
        }
    }
    out
}

/// Visits every nonempty word of the ball in a fixed order: words of length
/// one first, then the subtree of each length-two prefix.
pub fn for_each_in_ball<F: FnMut(&[u64], &UnimodularMatrix)>(
    alphabet: u64,
    bound: NormBound,
    parity: Parity,
    mut visit: F,
) -> Result<()> {
    check_alphabet(alphabet)?;
    if parity == Parity::Any {
        for x in 1..=alphabet {
            let m = UnimodularMatrix::generator(x);
            if bound.admits(&m) {
                visit(&[x], &m);
            }
        }
    }
    for (mut word, m) in prefix_shards(alphabet, bound) {
        walk_ball(alphabet, bound, parity, &mut word, m, &mut |w, mm| {
            visit(w, mm);
            true
        });
    }
    Ok(())
}

/// Materializes the ball `{g : ||g|| <= n}`, sharded by length-two prefix.
pub fn enumerate_ball(alphabet: u64, n: f64, parity: Parity) -> Result<Vec<SemigroupElement>> {
    enumerate_ball_within(alphabet, NormBound::closed(n), parity, DEFAULT_ELEMENT_CAP)
}

pub fn enumerate_ball_within(
    alphabet: u64,
    bound: NormBound,
    parity: Parity,
    cap: u64,
) -> Result<Vec<SemigroupElement>> {
    check_alphabet(alphabet)?;
    let expected = count_ball_capped(alphabet, bound, parity, cap)?;
    let mut out = Vec::with_capacity(expected as usize);
    if parity == Parity::Any {
        for x in 1..=alphabet {
            let m = UnimodularMatrix::generator(x);
            if bound.admits(&m) {
                out.push(SemigroupElement { word: Word::from_digits_unchecked(vec![x]), matrix: m });
            }
        }
    }
    let shards: Vec<Vec<SemigroupElement>> = prefix_shards(alphabet, bound)
        .into_par_iter()
        .map(|(mut word, m)| {
            let mut local = Vec::new();
            walk_ball(alphabet, bound, parity, &mut word, m, &mut |w, mm| {
                local.push(SemigroupElement { word: Word::from_digits_unchecked(w.to_vec()), matrix: *mm });
                true
            });
            local
        })
        .collect();
    for shard in shards {
        out.extend(shard);
    }
    Ok(out)
}

pub fn count_ball(alphabet: u64, n: f64, parity: Parity) -> Result<u64> {
    count_ball_within(alphabet, NormBound::closed(n), parity)
}

pub fn count_ball_within(alphabet: u64, bound: NormBound, parity: Parity) -> Result<u64> {
    count_ball_capped(alphabet, bound, parity, COUNT_CAP)
}

/// Counts the ball, giving up with `CapExceeded` as soon as it holds more
/// than `cap` elements.
pub fn count_ball_capped(alphabet: u64, bound: NormBound, parity: Parity, cap: u64) -> Result<u64> {
    const BATCH: u64 = 1 << 12;
    check_alphabet(alphabet)?;
    let singles = match parity {
        Parity::Any => (1..=alphabet)
            .filter(|&x| bound.admits(&UnimodularMatrix::generator(x)))
            .count() as u64,
        Parity::Even => 0,
    };
    let total = AtomicU64::new(singles);
    let over = || total.load(Ordering::Relaxed) > cap;
    prefix_shards(alphabet, bound).into_par_iter().for_each(|(mut word, m)| {
        let mut n = 0u64;
        walk_ball(alphabet, bound, parity, &mut word, m, &mut |_, _| {
            n += 1;
            if n == BATCH {
                total.fetch_add(n, Ordering::Relaxed);
                n = 0;
                return !over();
            }
            true
        });
        total.fetch_add(n, Ordering::Relaxed);
    });
    if over() {
        return Err(Error::CapExceeded { what: "ball element count", cap });
    }
    Ok(total.into_inner())
}

/// Least-squares line through `(log N, log count)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HensleyFit {
    pub alphabet: u64,
    pub norms: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

pub fn hensley_exponent(alphabet: u64, norms: &[f64]) -> Result<HensleyFit> {
    if norms.len() < 4 {
        return Err(Error::InvalidArgument("need at least four grid points".into()));
    }
    let mut sorted = norms.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    if sorted.len() < 4 || sorted[0] <= 1.0 {
        return Err(Error::InvalidArgument("degenerate norm grid".into()));
    }
    let counts = norms
        .iter()
        .map(|&n| count_ball(alphabet, n, Parity::Even))
        .collect::<Result<Vec<_>>>()?;
    if counts.contains(&0) {
        return Err(Error::InvalidArgument("empty ball on the grid; raise the smallest norm".into()));
    }
    let xs: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    Ok(HensleyFit { alphabet, norms: norms.to_vec(), counts, slope, intercept, residual })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

fn descend_traces<F: FnMut(&[u64], &UnimodularMatrix)>(
    alphabet: u64,
    max_trace: i128,
    word: &mut Vec<u64>,
    m: UnimodularMatrix,
    visit: &mut F,
) {
    for digit in 1..=alphabet {
        let child = m.times_generator(digit);
        let even = (word.len() + 1).is_multiple_of(2);
        let recordable = even && child.trace() <= max_trace;
        // every proper extension of `child` has trace >= a + b + c
        let extendable = child.a + child.b + child.c <= max_trace;
        if !recordable && !extendable {
            // both quantities grow with the digit
            break;
        }
        word.push(digit);
        if recordable {
            visit(word, &child);
        }
        if extendable {
            descend_traces(alphabet, max_trace, word, child, visit);
        }
        word.pop();
    }
}

/// Visits every even word with trace at most `max_trace`.
pub fn for_each_with_trace_at_most<F: FnMut(&[u64], &UnimodularMatrix)>(
    alphabet: u64,
    max_trace: u64,
    mut visit: F,
) -> Result<()> {
    check_alphabet(alphabet)?;
    if max_trace > TRACE_CAP {
        return Err(Error::CapExceeded { what: "trace", cap: TRACE_CAP });
    }
    let mut word = Vec::new();
    descend_traces(alphabet, max_trace as i128, &mut word, UnimodularMatrix::IDENTITY, &mut visit);
    Ok(())
}

/// The trace fiber `{g : tr g = t}` as words, in walk order.
pub fn trace_fiber(alphabet: u64, t: u64) -> Result<Vec<Word>> {
    if t < 3 {
        return Err(Error::InvalidArgument("trace must be at least 3".into()));
    }
    let mut out = Vec::new();
    for_each_with_trace_at_most(alphabet, t, |w, m| {
        if m.trace() == t as i128 {
            out.push(Word::from_digits_unchecked(w.to_vec()));
        }
    })?;
    Ok(out)
}

pub fn trace_multiplicity(alphabet: u64, t: u64) -> Result<u64> {
    if t < 3 {
        return Err(Error::InvalidArgument("trace must be at least 3".into()));
    }
    let mut n = 0;
    for_each_with_trace_at_most(alphabet, t, |_, m| {
        if m.trace() == t as i128 {
            n += 1;
        }
    })?;
    Ok(n)
}

/// `hist[t] = #{g : tr g = t}` for all `t <= max_trace` in one walk.
pub fn trace_histogram(alphabet: u64, max_trace: u64) -> Result<Vec<u64>> {
    let mut hist = vec![0u64; max_trace as usize + 1];
    for_each_with_trace_at_most(alphabet, max_trace, |_, m| hist[m.trace() as usize] += 1)?;
    Ok(hist)
}

/// Trace-`t` words grouped by rotation; lexicographically least rotations, sorted.
pub fn cyclic_classes(alphabet: u64, t: u64) -> Result<Vec<Word>> {
    let mut reps: Vec<Word> = trace_fiber(alphabet, t)?.iter().map(Word::canonical_rotation).collect();
    reps.sort();
    reps.dedup();
    Ok(reps)
}

/// The most populated even wordlength inside an open ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedLengthBall {
    pub label: String,
    pub length: usize,
    pub elements: Vec<SemigroupElement>,
    /// Size of the whole even ball.
    pub ball_size: u64,
    /// Population of every realized even length.
    pub populations: BTreeMap<usize, u64>,
}

pub fn build_fixed_length_ball(alphabet: u64, bound: f64, label: &str) -> Result<FixedLengthBall> {
    if bound < 3.0 {
        return Err(Error::InvalidArgument("bound must be at least 3".into()));
    }
    let all = enumerate_ball_within(alphabet, NormBound::open(bound), Parity::Even, DEFAULT_ELEMENT_CAP)?;
    if all.is_empty() {
        return Err(Error::InvalidArgument(format!("empty ball at bound {bound}")));
    }
    let mut populations = BTreeMap::new();
    for e in &all {
        *populations.entry(e.word.len()).or_insert(0u64) += 1;
    }
    // ties go to the shortest length
    let (&length, _) = populations
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .expect("nonempty");
    let ball_size = all.len() as u64;
    let mut elements: Vec<_> = all.into_iter().filter(|e| e.word.len() == length).collect();
    elements.sort_by(|a, b| a.word.cmp(&b.word));
    Ok(FixedLengthBall { label: label.to_string(), length, elements, ball_size, populations })
}

type ResidueKey = (u64, u64, u64, u64);

fn residue_key(m: &UnimodularMatrix, q: u64) -> ResidueKey {
    let r = |v: i128| v.rem_euclid(q as i128) as u64;
    (r(m.a), r(m.b), r(m.c), r(m.d))
}

/// The equidistributed subset of the `Gamma_2` ball and a record of how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct AlephSet {
    pub elements: Vec<SemigroupElement>,
    pub norm_bound: f64,
    pub modulus: u64,
    /// Radius of the seed ball.
    pub seed_radius: u64,
    /// Size of the residue-popular subset of the seed ball.
    pub popular_size: usize,
    pub pivot: Option<Word>,
    pub representatives: Vec<Word>,
}

impl AlephSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Smallest-norm `Gamma_2` element in every class of `SL_2(Z/modulus)`.
fn class_representatives(modulus: u64) -> Result<Vec<SemigroupElement>> {
    let classes: Vec<ResidueKey> = sl2_enumerate(modulus)?.map(|g| (g.a, g.b, g.c, g.d)).collect();
    let mut radius = 4.0;
    loop {
        let ball = enumerate_ball_within(2, NormBound::closed(radius), Parity::Even, DEFAULT_ELEMENT_CAP)?;
        let mut best: HashMap<ResidueKey, SemigroupElement> = HashMap::new();
        for e in ball {
            let key = residue_key(&e.matrix, modulus);
            let replace = match best.get(&key) {
                None => true,
                Some(cur) => (e.norm_sq(), &e.word) < (cur.norm_sq(), &cur.word),
            };
            if replace {
                best.insert(key, e);
            }
        }
        if classes.iter().all(|k| best.contains_key(k)) {
            return Ok(classes.iter().map(|k| best[k].clone()).collect());
        }
        radius *= 2.0;
        if radius > 1e6 {
            return Err(Error::Internal("Gamma_2 does not cover SL_2 of the modulus".into()));
        }
    }
}

fn build_aleph(seed: &FixedLengthBall, modulus: u64, reps: &[SemigroupElement]) -> Result<(Vec<SemigroupElement>, usize, Word)> {
    let order = reps.len() as u32;
    let mut by_class: BTreeMap<ResidueKey, Vec<&SemigroupElement>> = BTreeMap::new();
    for e in &seed.elements {
        by_class.entry(residue_key(&e.matrix, modulus)).or_default().push(e);
    }
    // most popular class, ties to the smallest residue key
    let popular = by_class
        .iter()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
        .map(|(_, v)| v.clone())
        .expect("seed ball is nonempty");
    let pivot = popular[0].clone();
    let mut power = UnimodularMatrix::IDENTITY;
    let mut power_word = Word::from_digits_unchecked(Vec::new());
    for _ in 1..order {
        power = power.checked_mul(&pivot.matrix)?;
        power_word = power_word.concat(&pivot.word);
    }
    let mut out = Vec::with_capacity(popular.len() * reps.len());
    for x in reps {
        let tail = power.checked_mul(&x.matrix)?;
        let tail_word = power_word.concat(&x.word);
        for s in &popular {
            out.push(SemigroupElement { word: s.word.concat(&tail_word), matrix: s.matrix.checked_mul(&tail)? });
        }
    }
    Ok((out, popular.len(), pivot.word))
}

/// Builds a subset of `Gamma_2` of norm `< y` whose residues are balanced
/// modulo `modulus`: a residue-popular slice `S'` of a fixed-length seed ball
/// of radius `U`, pushed to the identity class by `s^(R-1)` and then onto
/// every class by fixed representatives. `modulus = 1` returns the seed ball.
pub fn aleph_construct(y: f64, modulus: u64) -> Result<AlephSet> {
    let order = sl2_order(modulus)?;
    if modulus == 1 {
        let seed = build_fixed_length_ball(2, y, "aleph")?;
        return Ok(AlephSet {
            popular_size: seed.elements.len(),
            elements: seed.elements,
            norm_bound: y,
            modulus,
            seed_radius: y.ceil() as u64,
            pivot: None,
            representatives: Vec::new(),
        });
    }
    let reps = class_representatives(modulus)?;
    let max_rep = reps.iter().map(|r| (r.norm_sq() as f64).sqrt()).fold(0.0, f64::max);
    let bound_sq = NormBound::open(y).max_norm_sq();
    let mut radius = (y / max_rep).powf(1.0 / order as f64).floor() as u64;
    if radius < 3 {
        return Err(Error::InvalidArgument(format!(
            "norm bound {y} too small for modulus {modulus}; the seed ball is empty, try a larger bound"
        )));
    }
    let fits = |elems: &[SemigroupElement]| elems.iter().all(|e| e.norm_sq() as u128 <= bound_sq);
    let seed = build_fixed_length_ball(2, radius as f64, "aleph-seed")?;
    let mut best = build_aleph(&seed, modulus, &reps)?;
    if !fits(&best.0) {
        return Err(Error::Internal("aleph element exceeded the norm bound".into()));
    }
    // the submultiplicative bound is loose; grow the seed while everything fits
    loop {
        let seed = build_fixed_length_ball(2, (radius + 1) as f64, "aleph-seed")?;
        let next = build_aleph(&seed, modulus, &reps)?;
        if !fits(&next.0) {
            break;
        }
        radius += 1;
        best = next;
    }
    let (elements, popular_size, pivot) = best;
    Ok(AlephSet {
        elements,
        norm_bound: y,
        modulus,
        seed_radius: radius,
        popular_size,
        pivot: Some(pivot),
        representatives: reps.into_iter().map(|r| r.word).collect(),
    })
}

/// `max_{g0} | #{a = g0 mod q} / |aleph| - 1/|SL_2(q)| |`.
pub fn aleph_error(aleph: &[SemigroupElement], q: u64) -> Result<f64> {
    let order = sl2_order(q)? as f64;
    if aleph.is_empty() {
        return Err(Error::InvalidArgument("empty set".into()));
    }
    let mut counts: HashMap<ResidueKey, u64> = HashMap::new();
    for e in aleph {
        *counts.entry(residue_key(&e.matrix, q)).or_insert(0) += 1;
    }
    let n = aleph.len() as f64;
    let uniform = 1.0 / order;
    let mut worst = counts.values().map(|&c| (c as f64 / n - uniform).abs()).fold(0.0, f64::max);
    if (counts.len() as f64) < order {
        worst = worst.max(uniform);
    }
    Ok(worst)
}

/// The triple product `Xi . Aleph . Omega`, realized lazily.
#[derive(Debug, Clone)]
pub struct BilinearSet {
    pub xi: Vec<SemigroupElement>,
    pub aleph: Vec<SemigroupElement>,
    pub omega: Vec<SemigroupElement>,
}

fn fixed_length(label: &str, set: &[SemigroupElement]) -> Result<usize> {
    let len = set[0].word.len();
    if set.iter().any(|e| e.word.len() != len) {
        return Err(Error::InvalidArgument(format!("{label} members must share one wordlength")));
    }
    Ok(len)
}

pub fn build_pi(
    xi: Vec<SemigroupElement>,
    aleph: Vec<SemigroupElement>,
    omega: Vec<SemigroupElement>,
) -> Result<BilinearSet> {
    for (label, set) in [("Xi", &xi), ("Aleph", &aleph), ("Omega", &omega)] {
        if set.is_empty() {
            return Err(Error::InvalidArgument(format!("{label} is empty")));
        }
    }
    fixed_length("Xi", &xi)?;
    fixed_length("Omega", &omega)?;
    if aleph.iter().any(|e| !e.word.is_even() || e.word.max_digit() > 2) {
        return Err(Error::InvalidArgument("Aleph must lie in Gamma_2".into()));
    }
    Ok(BilinearSet { xi, aleph, omega })
}

impl BilinearSet {
    pub fn len(&self) -> u64 {
        (self.xi.len() * self.aleph.len() * self.omega.len()) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Products in `(xi, aleph, omega)` lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = SemigroupElement> + '_ {
        self.xi.iter().flat_map(move |x| {
            self.aleph.iter().flat_map(move |a| {
                let xa = x.matrix.checked_mul(&a.matrix).expect("bounded product");
                let xa_word = x.word.concat(&a.word);
                self.omega.iter().map(move |o| SemigroupElement {
                    word: xa_word.concat(&o.word),
                    matrix: xa.checked_mul(&o.matrix).expect("bounded product"),
                })
            })
        })
    }

    /// Traces of all products without forming the words.
    pub fn for_each_trace<F: FnMut(i128)>(&self, mut f: F) {
        for x in &self.xi {
            for a in &self.aleph {
                let m = x.matrix.checked_mul(&a.matrix).expect("bounded product");
                for o in &self.omega {
                    let w = &o.matrix;
                    f(m.a * w.a + m.b * w.c + m.c * w.b + m.d * w.d);
                }
            }
        }
    }
}
