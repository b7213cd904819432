//! Closed geodesics read off from a continued-fraction period: one semicircle
//! per rotation, from the purely periodic fixed point `alpha` to its conjugate.

use serde::{Deserialize, Serialize};

use crate::cf::{fixed_point, word_to_matrix, QuadraticIrrational, Word};
use crate::error::{Error, Result};
use crate::modular::{fmt_rational, Rational};

/// `sqrt(d)/q`, half the distance between a surd and its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurdHeight {
    pub d: i128,
    pub q: i128,
}

impl SurdHeight {
    pub fn to_f64(&self) -> f64 {
        (self.d as f64).sqrt() / self.q as f64
    }

    /// Exact comparison with the rational `num/den` (`den > 0`).
    pub fn cmp_rational(&self, num: i128, den: i128) -> std::cmp::Ordering {
        if num <= 0 {
            return std::cmp::Ordering::Greater;
        }
        // sqrt(d)/q vs num/den  <=>  d den^2 vs num^2 q^2
        (self.d * den * den).cmp(&(num * num * self.q * self.q))
    }

    fn cmp_height(&self, other: &SurdHeight) -> std::cmp::Ordering {
        (self.d * other.q * other.q).cmp(&(other.d * self.q * self.q))
    }
}

/// The semicircle joining `alpha` and its conjugate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub rotation: usize,
    pub alpha: QuadraticIrrational,
    pub center: Rational,
    pub height: SurdHeight,
}

impl Arc {
    pub fn radius(&self) -> f64 {
        self.height.to_f64()
    }

    pub fn center_f64(&self) -> f64 {
        *self.center.numer() as f64 / *self.center.denom() as f64
    }
}

fn hyperbolic_word(w: &Word) -> Result<Word> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    // an odd period and its double share every fixed point
    let ww = if w.is_even() { w.clone() } else { w.doubled() };
    let m = word_to_matrix(&ww)?;
    if !m.is_hyperbolic() {
        return Err(Error::NotHyperbolic(m.trace()));
    }
    Ok(ww)
}

/// One arc per rotation of `w`.
pub fn emit_arcs(w: &Word) -> Result<Vec<Arc>> {
    let ww = hyperbolic_word(w)?;
    (0..w.len())
        .map(|k| {
            let alpha = fixed_point(&word_to_matrix(&ww.rotate(k))?)?;
            if !alpha.is_reduced() {
                return Err(Error::Internal(format!("fixed point {alpha} is not reduced")));
            }
            Ok(Arc {
                rotation: k,
                alpha,
                center: Rational::new(alpha.p, alpha.q),
                height: SurdHeight { d: alpha.d, q: alpha.q },
            })
        })
        .collect()
}

pub fn rotation_heights_exact(w: &Word) -> Result<Vec<SurdHeight>> {
    Ok(emit_arcs(w)?.into_iter().map(|a| a.height).collect())
}

pub fn rotation_heights(w: &Word) -> Result<Vec<f64>> {
    Ok(rotation_heights_exact(w)?.iter().map(SurdHeight::to_f64).collect())
}

pub fn max_height_exact(w: &Word) -> Result<SurdHeight> {
    let hs = rotation_heights_exact(w)?;
    Ok(hs.into_iter().max_by(|a, b| a.cmp_height(b)).expect("nonempty word"))
}

pub fn max_height(w: &Word) -> Result<f64> {
    Ok(max_height_exact(w)?.to_f64())
}

/// Whether every rotation's apex stays at or below `cutoff`.
pub fn is_low_lying(w: &Word, cutoff: f64) -> Result<bool> {
    Ok(max_height(w)? <= cutoff)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeodesicProfile {
    pub period: Word,
    pub rotation_heights: Vec<f64>,
    pub max_height: f64,
    pub discriminant: i128,
}

impl GeodesicProfile {
    pub fn new(w: &Word) -> Result<Self> {
        let arcs = emit_arcs(w)?;
        let rotation_heights: Vec<f64> = arcs.iter().map(Arc::radius).collect();
        let max_height = rotation_heights.iter().cloned().fold(f64::MIN, f64::max);
        Ok(GeodesicProfile {
            period: w.clone(),
            rotation_heights,
            max_height,
            discriminant: arcs[0].alpha.d,
        })
    }
}

pub fn arcs_csv(arcs: &[Arc]) -> String {
    let mut out = String::from("rotation,alpha,center,center_f64,radius\n");
    for a in arcs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            a.rotation,
            a.alpha,
            fmt_rational(&a.center),
            a.center_f64(),
            a.radius()
        ));
    }
    out
}
