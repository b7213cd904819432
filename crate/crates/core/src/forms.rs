//! Indefinite binary quadratic forms `[A, B, C] = Ax^2 + Bxy + Cy^2`.
//!
//! Reduction uses the classical operator
//! `rho([A,B,C]) = [C, B', (B'^2 - D)/4C]` with `B' = -B mod 2|C|` placed in the
//! reduced window. On reduced forms `rho` is a permutation whose orbits are
//! the proper equivalence classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{is_square, is_squarefree, isqrt, surd_sign};
use crate::cf::{QuadraticIrrational, UnimodularMatrix, Word};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndefiniteForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl IndefiniteForm {
    pub fn new(a: i128, b: i128, c: i128) -> Result<Self> {
        let f = IndefiniteForm { a, b, c };
        let d = f.discriminant();
        if d <= 0 || is_square(d) {
            return Err(Error::SquareDiscriminant(d));
        }
        if a == 0 {
            return Err(Error::InvalidArgument("leading coefficient must be nonzero".into()));
        }
        Ok(f)
    }

    pub fn discriminant(&self) -> i128 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    /// `0 < B < sqrt(D)` and `sqrt(D) - B < 2|A| < sqrt(D) + B`.
    pub fn is_reduced(&self) -> bool {
        let d = self.discriminant();
        let two_a = 2 * self.a.abs();
        self.b > 0
            && surd_sign(self.b, -1, d) < 0
            && surd_sign(two_a + self.b, -1, d) > 0
            && surd_sign(self.b - two_a, 1, d) > 0
    }

    /// One application of the reduction operator.
    pub fn rho(&self) -> IndefiniteForm {
        let d = self.discriminant();
        let c = self.c;
        let m = 2 * c.abs();
        let b_next = if c * c > d {
            let r = (-self.b).rem_euclid(m);
            if r > c.abs() {
                r - m
            } else {
                r
            }
        } else {
            let s = isqrt(d as u128) as i128;
            s - (s + self.b).rem_euclid(m)
        };
        IndefiniteForm { a: c, b: b_next, c: (b_next * b_next - d) / (4 * c) }
    }

    /// `(B + sqrt(D)) / 2|C|`, reduced whenever the form is. Its period is
    /// the word of the matrices whose fixed points are roots of the class.
    pub fn reduced_root(&self) -> QuadraticIrrational {
        QuadraticIrrational { p: self.b, q: 2 * self.c.abs(), d: self.discriminant() }
    }

    /// Evaluates `A x^2 + B x + C` at a surd, returning the `(rational, sqrt)`
    /// parts of the numerator over `q^2`.
    pub fn eval_at(&self, x: &QuadraticIrrational) -> (i128, i128) {
        let (p, q, d) = (x.p, x.q, x.d);
        // x = (p + s)/q, x^2 = (p^2 + d + 2ps)/q^2
        let rational = self.a * (p * p + d) + self.b * p * q + self.c * q * q;
        let irrational = self.a * 2 * p + self.b * q;
        (rational, irrational)
    }
}

impl fmt::Display for IndefiniteForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

impl FromStr for IndefiniteForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected [A,B,C], got {s:?}"));
        let inner = s.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(bad)?;
        let parts = inner
            .split(',')
            .map(|t| t.trim().parse::<i128>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        match parts[..] {
            [a, b, c] => IndefiniteForm::new(a, b, c),
            _ => Err(bad()),
        }
    }
}

/// A full orbit of reduced forms under `rho`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormCycle {
    pub forms: Vec<IndefiniteForm>,
    pub discriminant: i128,
}

impl FormCycle {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn contains(&self, f: &IndefiniteForm) -> bool {
        self.forms.contains(f)
    }

    /// Smallest member, used to compare cycles irrespective of starting point.
    pub fn key(&self) -> IndefiniteForm {
        *self.forms.iter().min().expect("cycle is nonempty")
    }

    pub fn word(&self) -> Word {
        cycle_to_word(self)
    }

    pub fn to_json(&self) -> String {
        let forms: Vec<String> = self.forms.iter().map(|f| format!("\"{f}\"")).collect();
        format!(
            "{{\"discriminant\":{},\"forms\":[{}],\"word\":[{}]}}",
            self.discriminant,
            forms.join(","),
            self.word()
        )
    }
}

pub fn discriminant(f: &IndefiniteForm) -> i128 {
    f.discriminant()
}

/// Fundamental discriminant test for `D > 0`.
pub fn is_fundamental(d: u64) -> Result<bool> {
    if d == 0 {
        return Err(Error::InvalidArgument("discriminant must be positive".into()));
    }
    Ok(match d % 4 {
        1 => is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m % 4, 2 | 3) && is_squarefree(m)
        }
        _ => false,
    })
}

/// `[c, d - a, -b]`, whose root `(a - d + sqrt(D))/2c` is the fixed point of `m`.
pub fn matrix_to_form(m: &UnimodularMatrix) -> Result<IndefiniteForm> {
    if m.det() != 1 {
        return Err(Error::DeterminantNotOne(m.det()));
    }
    if !m.is_hyperbolic() {
        return Err(Error::NotHyperbolic(m.trace().abs()));
    }
    if m.c == 0 {
        return Err(Error::FixedPointAtInfinity);
    }
    Ok(IndefiniteForm { a: m.c, b: m.d - m.a, c: -m.b })
}

pub fn reduce(f: &IndefiniteForm) -> IndefiniteForm {
    let mut g = *f;
    while !g.is_reduced() {
        g = g.rho();
    }
    g
}

pub fn cycle(f: &IndefiniteForm) -> Result<FormCycle> {
    if !f.is_reduced() {
        return Err(Error::NotReduced(f.a, f.b, f.c));
    }
    let mut forms = vec![*f];
    let mut g = f.rho();
    while g != *f {
        forms.push(g);
        g = g.rho();
    }
    Ok(FormCycle { forms, discriminant: f.discriminant() })
}

/// All primitive reduced forms of discriminant `d`, sorted.
pub fn reduced_forms(d: i128) -> Result<Vec<IndefiniteForm>> {
    if d <= 0 || is_square(d) {
        return Err(Error::SquareDiscriminant(d));
    }
    if d.rem_euclid(4) > 1 {
        return Err(Error::InvalidArgument(format!("discriminant {d} is not 0 or 1 mod 4")));
    }
    let s = isqrt(d as u128) as i128;
    let mut out = Vec::new();
    let mut b = if d % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let n = d - b * b;
        // 2|A| in (s - b, s + b], i.e. sqrt(D) - B < 2|A| < sqrt(D) + B
        for a_abs in ((s - b) / 2 + 1)..=((s + b) / 2) {
            if a_abs == 0 || n % (4 * a_abs) != 0 {
                continue;
            }
            for a in [a_abs, -a_abs] {
                let f = IndefiniteForm { a, b, c: -n / (4 * a) };
                if f.is_primitive() && f.is_reduced() {
                    out.push(f);
                }
            }
        }
        b += 2;
    }
    out.sort();
    Ok(out)
}

/// Partition of the primitive reduced forms of `d` into `rho`-cycles
/// (proper, i.e. narrow, classes), ordered by their smallest member.
pub fn class_cycles(d: i128) -> Result<Vec<FormCycle>> {
    let forms = reduced_forms(d)?;
    let mut seen = BTreeSet::new();
    let mut cycles = Vec::new();
    for f in &forms {
        if seen.contains(f) {
            continue;
        }
        let cy = cycle(f)?;
        for g in &cy.forms {
            seen.insert(*g);
        }
        cycles.push(cy);
    }
    if seen.len() != forms.len() {
        return Err(Error::Internal("rho left the set of reduced forms".into()));
    }
    cycles.sort_by_key(|c| c.key());
    Ok(cycles)
}

/// Narrow and wide class counts. The wide count identifies the cycle of
/// `[A,B,C]` with that of `[-A,B,-C]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    pub narrow: usize,
    pub wide: usize,
}

/// Narrow cycles grouped into wide classes: the cycle of `[A,B,C]` together
/// with that of `[-A,B,-C]` when they differ. Groups are ordered by key.
pub fn wide_classes(d: i128) -> Result<Vec<Vec<FormCycle>>> {
    let cycles = class_cycles(d)?;
    let index: BTreeMap<IndefiniteForm, usize> = cycles
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.forms.iter().map(move |f| (*f, i)))
        .collect();
    let mut taken = vec![false; cycles.len()];
    let mut groups = Vec::new();
    for (i, cy) in cycles.iter().enumerate() {
        if taken[i] {
            continue;
        }
        let f = cy.forms[0];
        let twin = index[&IndefiniteForm { a: -f.a, b: f.b, c: -f.c }];
        taken[i] = true;
        let mut group = vec![cy.clone()];
        if !taken[twin] {
            taken[twin] = true;
            group.push(cycles[twin].clone());
        }
        groups.push(group);
    }
    Ok(groups)
}

pub fn class_counts(d: i128) -> Result<ClassCounts> {
    let groups = wide_classes(d)?;
    Ok(ClassCounts { narrow: groups.iter().map(Vec::len).sum(), wide: groups.len() })
}

/// Partial quotients read off the cycle: the period of the reduced root of
/// the first member, doubled when odd so the word has determinant one.
/// Round-trips with `reduce(matrix_to_form(word_to_matrix(w)))` up to rotation.
pub fn cycle_to_word(cy: &FormCycle) -> Word {
    let f = cy.forms[0];
    let period = f
        .reduced_root()
        .cf_expand()
        .expect("reduced form has a normalized root")
        .period;
    if period.is_even() {
        period
    } else {
        period.doubled()
    }
}
