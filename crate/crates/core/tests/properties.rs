mod common;

use std::collections::BTreeMap;

use common::{word, words_of_length};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thinsieve::arith::{factorize, is_square};
use thinsieve::cf::{fixed_point, word_to_matrix, QuadraticIrrational, UnimodularMatrix, Word};
use thinsieve::dimension::{estimate, pressure_sum};
use thinsieve::forms::{class_cycles, cycle, cycle_to_word, matrix_to_form, reduce, reduced_forms};
use thinsieve::geodesic::{max_height, max_height_exact};
use thinsieve::modular::{sl2_charsum, sl2_charsum_direct, sl2_enumerate, IntegerVector4};
use thinsieve::semigroup::{
    cyclic_classes, enumerate_ball, trace_fiber, trace_histogram, trace_multiplicity, Parity,
};
use thinsieve::sieve::{
    a_q, class_census, remainder_profile, squarefree_trace_census, SiftingSequence,
};

fn digits(max_len: usize, alphabet: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1..=alphabet, 1..=max_len)
}

fn even_digits(max_half: usize, alphabet: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec((1..=alphabet, 1..=alphabet), 1..=max_half)
        .prop_map(|pairs| pairs.into_iter().flat_map(|(a, b)| [a, b]).collect())
}

proptest! {
    #[test]
    fn word_matrix_is_nonnegative_with_signed_determinant(d in digits(12, 9)) {
        let m = word_to_matrix(&word(&d)).unwrap();
        prop_assert!(m.a >= 0 && m.b >= 0 && m.c >= 0 && m.d >= 0);
        prop_assert_eq!(m.det(), if d.len() % 2 == 0 { 1 } else { -1 });
        prop_assert_eq!(m.norm_sq(), m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
    }

    #[test]
    fn continuant_identity(d in digits(14, 20)) {
        let (mut p, mut p_prev) = (1i128, 0i128);
        let (mut q, mut q_prev) = (0i128, 1i128);
        for &a in &d {
            let a = a as i128;
            (p, p_prev) = (a * p + p_prev, p);
            (q, q_prev) = (a * q + q_prev, q);
        }
        let m = word_to_matrix(&word(&d)).unwrap();
        prop_assert_eq!((m.a, m.b, m.c, m.d), (p, p_prev, q, q_prev));
    }

    #[test]
    fn even_words_round_trip(d in even_digits(5, 6)) {
        let w = word(&d);
        let m = word_to_matrix(&w).unwrap();
        prop_assume!(m.is_hyperbolic());
        let x = fixed_point(&m).unwrap();
        prop_assert!(x.is_reduced());
        let e = x.cf_expand().unwrap();
        prop_assert!(e.preperiod.is_empty());
        // a power of a shorter word expands to that shorter period
        let k = w.len() / e.period.len();
        prop_assert_eq!(k * e.period.len(), w.len());
        let repeated = word(&e.period.digits().repeat(k));
        prop_assert!(repeated.is_rotation_of(&w));
    }

    #[test]
    fn galois_conjugation_is_an_involution(p in -50i128..50, d in 2i128..500, pick in 0usize..16) {
        prop_assume!(!is_square(d));
        let n = (d - p * p).abs().max(1);
        let divs: Vec<i128> = (1..=n).filter(|k| (d - p * p) % k == 0).collect();
        let q = divs[pick % divs.len()] * if pick % 2 == 0 { 1 } else { -1 };
        let x = QuadraticIrrational::new(p, q, d).unwrap();
        prop_assert_eq!(x.galois_conjugate().galois_conjugate(), x);
        // purely periodic exactly when reduced
        let e = x.cf_expand().unwrap();
        prop_assert_eq!(e.preperiod.is_empty(), x.is_reduced());
    }

    #[test]
    fn fixed_point_is_root_of_its_form(d in even_digits(4, 7)) {
        let m = word_to_matrix(&word(&d)).unwrap();
        prop_assume!(m.is_hyperbolic());
        let f = matrix_to_form(&m).unwrap();
        prop_assert_eq!(f.discriminant(), m.trace() * m.trace() - 4);
        prop_assert_eq!(f.eval_at(&fixed_point(&m).unwrap()), (0, 0));
        prop_assert_eq!(reduce(&f).discriminant(), f.discriminant());
    }

    #[test]
    fn max_height_is_rotation_invariant(d in even_digits(4, 9), k in 0usize..8) {
        let w = word(&d);
        prop_assert_eq!(max_height_exact(&w).unwrap(), max_height_exact(&w.rotate(k % w.len())).unwrap());
    }

    #[test]
    fn joint_divisibility_counts(traces in prop::collection::vec(3i128..400, 1..60)) {
        let seq = SiftingSequence::from_traces(traces.clone()).unwrap();
        for (q1, q2) in [(2u64, 3u64), (3, 5), (5, 7), (2, 35), (6, 7)] {
            let joint = a_q(&seq, q1 * q2).unwrap();
            let both = traces.iter().filter(|&&t| {
                let n = t * t - 4;
                n % q1 as i128 == 0 && n % q2 as i128 == 0
            }).count() as u64;
            prop_assert_eq!(joint, both);
            prop_assert!(joint <= a_q(&seq, q1).unwrap().min(a_q(&seq, q2).unwrap()));
        }
    }
}

#[test]
fn purely_periodic_iff_reduced_on_word_fixed_points() {
    for len in (2..=6).step_by(2) {
        for w in words_of_length(4, len) {
            let m = word_to_matrix(&w).unwrap();
            if !m.is_hyperbolic() {
                continue;
            }
            let x = fixed_point(&m).unwrap();
            assert!(x.is_reduced(), "{w}");
            assert!(x.cf_expand().unwrap().preperiod.is_empty(), "{w}");
            // the repelling fixed point is not reduced and has a preperiod
            let y = x.galois_conjugate();
            assert!(!y.is_reduced());
            assert!(!y.cf_expand().unwrap().preperiod.is_empty(), "{w}");
        }
    }
}

#[test]
fn form_discriminant_of_gamma_two_words() {
    for len in (2..=8).step_by(2) {
        for w in words_of_length(2, len) {
            let m = word_to_matrix(&w).unwrap();
            let f = matrix_to_form(&m).unwrap();
            assert_eq!(f.discriminant(), m.trace() * m.trace() - 4);
        }
    }
}

#[test]
fn cycles_partition_reduced_forms() {
    for d in (5..400i128).filter(|d| d % 4 <= 1 && !is_square(*d)) {
        let forms = reduced_forms(d).unwrap();
        let cycles = class_cycles(d).unwrap();
        let mut seen = BTreeMap::new();
        for (i, cy) in cycles.iter().enumerate() {
            assert_eq!(cy.len() % 2, 0, "odd cycle at {d}");
            for f in &cy.forms {
                assert_eq!(f.discriminant(), d);
                assert!(seen.insert(*f, i).is_none(), "{f} in two cycles");
            }
        }
        assert_eq!(seen.len(), forms.len(), "D = {d}");
    }
}

#[test]
fn cycle_members_share_a_height() {
    for d in [1365i128, 1337, 221, 45 * 45 - 4] {
        for cy in class_cycles(d).unwrap() {
            let top = max_height_exact(&cycle_to_word(&cy)).unwrap();
            for f in &cy.forms {
                let rotated = cycle(f).unwrap();
                assert_eq!(max_height_exact(&cycle_to_word(&rotated)).unwrap(), top);
            }
        }
    }
}

#[test]
fn words_with_bounded_digits_match_cyclic_classes() {
    let d = 1365;
    let narrow = class_cycles(d).unwrap();
    let low: Vec<_> = narrow.iter().filter(|c| cycle_to_word(c).max_digit() <= 35).collect();
    let census = class_census(d as u64, 35).unwrap();
    assert_eq!(cyclic_classes(35, 37).unwrap().len(), census.len());
    for c in &census {
        assert!(low.iter().any(|l| l.contains(&c.forms[0])));
    }
}

#[test]
fn charsum_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (q1, q2) in [(2u64, 3u64), (3, 5)] {
        let q = q1 * q2;
        for _ in 0..40 {
            let s = IntegerVector4::new(
                rng.gen_range(0..q as i64),
                rng.gen_range(0..q as i64),
                rng.gen_range(0..q as i64),
                rng.gen_range(0..q as i64),
            );
            let inv = |a: u64, m: u64| (1..m).find(|x| (a * x) % m == 1).unwrap() as i64;
            let left = sl2_charsum_direct(q1, &s.scale_mod(inv(q2 % q1, q1), q1 as i64)).unwrap();
            let right = sl2_charsum_direct(q2, &s.scale_mod(inv(q1 % q2, q2), q2 as i64)).unwrap();
            let whole = sl2_charsum_direct(q, &s).unwrap();
            assert!((whole - left * right).norm() < 1e-6, "q = {q}, s = {s:?}");
        }
    }
}

#[test]
fn charsum_bound_on_primitive_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in (2..=30u64).filter(|&q| factorize(q).iter().all(|&(_, e)| e == 1)) {
        let nu = factorize(q).len() as i32;
        let bound = 2f64.powi(nu) * (q as f64).powf(1.5) + 1e-6;
        let qi = q as i64;
        let check = |s: IntegerVector4| {
            if s.is_primitive_mod(q) {
                let v = sl2_charsum(q, &s).unwrap().norm();
                assert!(v <= bound, "q = {q}, s = {s:?}, |sum| = {v}");
            }
        };
        if q <= 6 {
            for x in 0..qi {
                for y in 0..qi {
                    for z in 0..qi {
                        for w in 0..qi {
                            check(IntegerVector4::new(x, y, z, w));
                        }
                    }
                }
            }
        } else {
            for _ in 0..1000 {
                check(IntegerVector4::new(
                    rng.gen_range(0..qi),
                    rng.gen_range(0..qi),
                    rng.gen_range(0..qi),
                    rng.gen_range(0..qi),
                ));
            }
        }
    }
}

#[test]
fn norm_strictly_increases_along_words() {
    for len in 0..=5 {
        for w in words_of_length(3, len) {
            let m = if len == 0 { UnimodularMatrix::IDENTITY } else { word_to_matrix(&w).unwrap() };
            for g in 1..=3 {
                assert!(m.times_generator(g).norm_sq() > m.norm_sq());
            }
        }
    }
}

#[test]
fn multiplicity_is_monotone_in_the_alphabet() {
    let hists: Vec<Vec<u64>> = (1..=6).map(|a| trace_histogram(a, 300).unwrap()).collect();
    for t in 3..=300 {
        for a in 1..hists.len() {
            assert!(hists[a - 1][t] <= hists[a][t], "t = {t}, alphabet {}", a + 1);
        }
    }
    assert_eq!(trace_multiplicity(4, 37).unwrap(), hists[3][37]);
}

#[test]
fn multiplicity_grows_slower_than_power() {
    for a in 2..=10u64 {
        let hist = trace_histogram(a, 10_000).unwrap();
        for (t, &m) in hist.iter().enumerate().skip(100) {
            assert!((m as f64) <= (t as f64).powf(1.3), "alphabet {a}, t = {t}, M = {m}");
        }
    }
}

#[test]
fn cyclic_classes_partition_the_fiber() {
    for (a, t) in [(2u64, 37u64), (5, 101), (35, 37), (3, 250)] {
        let fiber = trace_fiber(a, t).unwrap();
        let reps = cyclic_classes(a, t).unwrap();
        for r in &reps {
            assert_eq!(r, &r.canonical_rotation());
        }
        let covered: usize = reps
            .iter()
            .map(|r| fiber.iter().filter(|w| w.is_rotation_of(r)).count())
            .sum();
        assert_eq!(covered, fiber.len());
        for w in &fiber {
            assert_eq!(reps.iter().filter(|r| w.is_rotation_of(r)).count(), 1);
        }
    }
}

#[test]
fn pressure_is_continuous_and_has_a_root() {
    for a in 2..=5u64 {
        let f = |s: f64| pressure_sum(a, 6, s).unwrap();
        assert!(f(0.0) > 1.0 && f(1.0) < 1.0);
        for i in 0..100 {
            let s = i as f64 / 100.0;
            assert!((f(s) - f(s + 1e-4)).abs() < 1e-2 * f(s));
        }
    }
}

#[test]
fn remainders_calibrate_on_uniform_group_samples() {
    let q = 30u64;
    let group: Vec<u64> = sl2_enumerate(q).unwrap().map(|g| g.trace()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut relative = Vec::new();
    for size in [1_000usize, 100_000] {
        let traces = (0..size).map(|_| (group[rng.gen_range(0..group.len())] + 3 * q) as i128);
        let seq = SiftingSequence::from_traces(traces).unwrap();
        let p = remainder_profile(&seq, q + 1).unwrap();
        let row = p.rows.iter().find(|r| r.q == q).unwrap();
        let r = (*row.remainder.numer() as f64 / *row.remainder.denom() as f64).abs();
        relative.push(r / size as f64);
    }
    assert!(relative[1] < relative[0].max(1e-3));
    assert!(relative[1] < 5e-3);
}

#[test]
fn squarefree_fraction_is_a_proper_fraction() {
    for n in [1e2, 1e3, 1e4] {
        let c = squarefree_trace_census(2, n).unwrap();
        assert!(c.squarefree_count > 0 && c.squarefree_count < c.ball_count);
    }
}

#[test]
fn class_census_words_are_low_lying() {
    for (d, a) in [(1365u64, 35u64), (1365, 2), (5, 1), (221, 13)] {
        for cy in class_census(d, a).unwrap() {
            let w = cycle_to_word(&cy);
            assert!(w.max_digit() <= a);
            assert!(max_height(&w).unwrap() < (a as f64 + 2.0) / 2.0);
        }
    }
}

#[test]
fn reruns_are_identical() {
    let a = enumerate_ball(3, 500.0, Parity::Even).unwrap();
    let b = enumerate_ball(3, 500.0, Parity::Even).unwrap();
    assert_eq!(a, b);
    assert_eq!(estimate(3, 8, 1e-5).unwrap(), estimate(3, 8, 1e-5).unwrap());
    let words: Vec<Word> = a.iter().take(50).map(|e| e.word.clone()).collect();
    assert_eq!(SiftingSequence::from_words(&words).unwrap(), SiftingSequence::from_words(&words).unwrap());
}
