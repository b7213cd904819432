//! Hausdorff dimension of the reals whose partial quotients are bounded by
//! `alphabet`, estimated from the lengths of depth-`k` cylinders.
//!
//! With `Z_k(s) = sum_{|w| = k} |I_w|^s` and the distortion estimate
//! `|I_u||I_v|/4 <= |I_uv| <= 4 |I_u||I_v|`, the pressure satisfies
//! `(log Z_k(s) - s log 4)/k <= P(s) <= (log Z_k(s) + s log 4)/k`, which brackets
//! the zero of `P`. That bracket closes like `1/k`. The ratios `Z_k/Z_{k-1}`
//! converge geometrically, so the returned interval is the distortion bracket
//! intersected with the depth-`k` ratio root widened by its distance to the
//! depth-`k-1` ratio root.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::{word_to_matrix, Word};
use crate::error::{Error, Result};
use crate::modular::Rational;

/// Largest number of cylinders summed at one depth.
pub const CYLINDER_BUDGET: u64 = 10_000_000;
/// Distortion constant relating `|I_uv|` to `|I_u||I_v|`.
pub const DISTORTION: f64 = 4.0;

/// Length of the cylinder `{[0; w, tail]}`, i.e. `1/(q_k (q_k + q_{k-1}))`.
pub fn cylinder_length(w: &Word) -> Result<Rational> {
    let m = word_to_matrix(w)?;
    // for [0; w] the continuant denominators are the top row of the word matrix
    let q = m.a;
    let q_prev = m.b;
    Ok(Rational::new(1, q * (q + q_prev)))
}

pub fn max_depth(alphabet: u64) -> u32 {
    if alphabet <= 1 {
        return 64;
    }
    let mut k = 0u32;
    let mut size = 1u64;
    while size.saturating_mul(alphabet) <= CYLINDER_BUDGET {
        size *= alphabet;
        k += 1;
    }
    k
}

fn check_budget(alphabet: u64, depth: u32) -> Result<()> {
    if alphabet == 0 {
        return Err(Error::InvalidArgument("alphabet bound must be at least 1".into()));
    }
    if depth > max_depth(alphabet) {
        return Err(Error::CapExceeded { what: "cylinder count", cap: CYLINDER_BUDGET });
    }
    Ok(())
}

/// `-log |I_w|` for every word of length `depth`, sharded by first digit.
fn neg_log_lengths(alphabet: u64, depth: u32) -> Vec<f64> {
    fn walk(alphabet: u64, left: u32, q: f64, q_prev: f64, out: &mut Vec<f64>) {
        if left == 0 {
            out.push((q * (q + q_prev)).ln());
            return;
        }
        for x in 1..=alphabet {
            walk(alphabet, left - 1, q * x as f64 + q_prev, q, out);
        }
    }
    if depth == 0 {
        return vec![0.0];
    }
    let shards: Vec<Vec<f64>> = (1..=alphabet)
        .into_par_iter()
        .map(|x| {
            let mut out = Vec::new();
            walk(alphabet, depth - 1, x as f64, 1.0, &mut out);
            out
        })
        .collect();
    shards.concat()
}

fn sum_powers(neg_logs: &[f64], s: f64) -> f64 {
    // fixed chunking keeps the summation order independent of the thread count
    neg_logs
        .par_chunks(1 << 14)
        .map(|c| c.iter().map(|&l| (-s * l).exp()).sum::<f64>())
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// `sum_{|w| = depth} |I_w|^s`.
pub fn pressure_sum(alphabet: u64, depth: u32, s: f64) -> Result<f64> {
    check_budget(alphabet, depth)?;
    Ok(sum_powers(&neg_log_lengths(alphabet, depth), s))
}

/// Largest `s` in `[0, 1]` with `f(s) > 0`, for decreasing `f`, to within `tol`.
/// Returns `(lo, hi)` with `f(lo) >= 0` side and `hi` the other side.
fn bisect<F: Fn(f64) -> f64>(f: F, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if f(lo) <= 0.0 {
        return (0.0, 0.0);
    }
    if f(hi) >= 0.0 {
        return (1.0, 1.0);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub alphabet: u64,
    pub depth: u32,
    pub lower: f64,
    pub upper: f64,
    /// Root of `Z_k(s) = 1`.
    pub moran_root: f64,
    /// Root of `Z_k(s) = Z_{k-1}(s)`.
    pub ratio_root: f64,
    pub distortion_lower: f64,
    pub distortion_upper: f64,
}

impl DimensionEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

pub fn estimate(alphabet: u64, depth: u32, tol: f64) -> Result<DimensionEstimate> {
    if tol < 1e-6 {
        return Err(Error::InvalidArgument("tolerance must be at least 1e-6".into()));
    }
    if depth < 2 {
        return Err(Error::InvalidArgument("depth must be at least 2".into()));
    }
    check_budget(alphabet, depth)?;
    let tol = tol.min(1e-3);
    let deep = neg_log_lengths(alphabet, depth);
    let mid = neg_log_lengths(alphabet, depth - 1);
    let shallow = neg_log_lengths(alphabet, depth - 2);
    let log_c = DISTORTION.ln();

    let log_z = |v: &[f64], s: f64| sum_powers(v, s).ln();
    let (moran_root, _) = bisect(|s| log_z(&deep, s), tol);
    let (distortion_lower, _) = bisect(|s| log_z(&deep, s) - s * log_c, tol);
    let (_, distortion_upper) = bisect(|s| log_z(&deep, s) + s * log_c, tol);
    let ratio = |a: &[f64], b: &[f64]| {
        let (lo, hi) = bisect(|s| log_z(a, s) - log_z(b, s), tol);
        0.5 * (lo + hi)
    };
    let ratio_root = ratio(&deep, &mid);
    let previous = if depth >= 3 {
        ratio(&mid, &shallow)
    } else {
        bisect(|s| log_z(&mid, s), tol).0
    };
    let gap = (ratio_root - previous).abs() + tol;
    let lower = (ratio_root - gap).max(distortion_lower).max(0.0);
    let upper = (ratio_root + gap).min(distortion_upper).min(1.0);
    if lower > upper {
        return Err(Error::Internal(format!(
            "ratio root {ratio_root} outside the distortion bracket [{distortion_lower}, {distortion_upper}]"
        )));
    }
    Ok(DimensionEstimate {
        alphabet,
        depth,
        lower,
        upper,
        moran_root,
        ratio_root,
        distortion_lower,
        distortion_upper,
    })
}

/// `1 - 6/(pi^2 A)`, the leading large-alphabet behaviour.
pub fn large_alphabet_asymptotic(alphabet: u64) -> f64 {
    1.0 - 6.0 / (std::f64::consts::PI.powi(2) * alphabet as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(d: &[u64]) -> Word {
        Word::new(d.to_vec()).unwrap()
    }

    #[test]
    fn cylinder_lengths() {
        assert_eq!(cylinder_length(&w(&[1])).unwrap(), Rational::new(1, 2));
        assert_eq!(cylinder_length(&w(&[2])).unwrap(), Rational::new(1, 6));
        assert_eq!(cylinder_length(&w(&[1, 1])).unwrap(), Rational::new(1, 6));
        assert!(cylinder_length(&w(&[])).is_err());
    }

    #[test]
    fn cylinders_match_interval_endpoints() {
        // I_w has endpoints p_k/q_k and (p_k + p_{k-1})/(q_k + q_{k-1})
        for d in [&[1u64, 2, 3][..], &[2, 2], &[3, 1, 1, 2]] {
            let word = w(d);
            let m = word_to_matrix(&word).unwrap();
            let (p, q, pp, qp) = (m.c, m.a, m.d, m.b);
            let len = Rational::new(p, q) - Rational::new(p + pp, q + qp);
            let len = if len < Rational::from_integer(0) { -len } else { len };
            assert_eq!(len, cylinder_length(&word).unwrap());
        }
    }

    #[test]
    fn pressure_values() {
        assert!((pressure_sum(1, 7, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((pressure_sum(2, 1, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((pressure_sum(2, 1, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(pressure_sum(50, 5, 0.5), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn pressure_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let v = pressure_sum(3, 6, i as f64 / 20.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn depth_budget() {
        assert_eq!(max_depth(50), 4);
        assert_eq!(max_depth(20), 5);
        assert_eq!(max_depth(2), 23);
    }

    #[test]
    fn single_digit_alphabet_has_dimension_zero() {
        let e = estimate(1, 10, 1e-6).unwrap();
        assert_eq!(e.lower, 0.0);
        assert!(e.upper < 1e-3);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(estimate(2, 10, 1e-8).is_err());
        assert!(estimate(2, 1, 1e-3).is_err());
        assert!(estimate(50, 6, 1e-3).is_err());
    }

    fn all_words(alphabet: u64, len: usize) -> Vec<Word> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|v: Vec<u64>| {
                    (1..=alphabet).map(move |x| {
                        let mut v = v.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(|v| w(&v)).collect()
    }

    #[test]
    fn bounded_distortion_exhaustive() {
        let c = Rational::from_integer(4);
        for m in 1..=4 {
            for n in 1..=(4 - m).max(1) {
                for u in all_words(3, m) {
                    for v in all_words(3, n) {
                        let lu = cylinder_length(&u).unwrap();
                        let lv = cylinder_length(&v).unwrap();
                        let luv = cylinder_length(&u.concat(&v)).unwrap();
                        assert!(luv <= c * lu * lv, "{u} {v}");
                        assert!(luv * c >= lu * lv, "{u} {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn two_digit_dimension() {
        let e = estimate(2, 12, 1e-6).unwrap();
        assert!(e.lower > 0.50 && e.upper < 0.56);
        assert!(e.contains(0.5312805));
        assert!(e.width() < 1e-3);
    }

    #[test]
    fn monotone_in_alphabet() {
        let mut prev = 0.0;
        for a in 2..=6 {
            let e = estimate(a, 6, 1e-5).unwrap();
            assert!(e.lower > prev, "alphabet {a}");
            prev = e.upper;
        }
    }

    #[test]
    fn large_alphabet() {
        let e = estimate(50, 3, 1e-4).unwrap();
        assert!((e.midpoint() - large_alphabet_asymptotic(50)).abs() < 0.02);
    }
}
