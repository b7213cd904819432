//! The acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! wall time checked against each criterion's budget.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{bfs_ball, word, words_of_length};
use thinsieve::arith::{factorize, is_prime, is_squarefree};
use thinsieve::cf::{fixed_point, word_to_matrix, Word};
use thinsieve::dimension::{estimate, large_alphabet_asymptotic, max_depth};
use thinsieve::forms::{
    cycle, cycle_to_word, is_fundamental, matrix_to_form, reduce, FormCycle, IndefiniteForm,
};
use thinsieve::geodesic::{max_height, max_height_exact};
use thinsieve::modular::{
    beta, beta_bruteforce, kloosterman, rho_t_bruteforce, sl2_charsum, sqrt4_count, IntegerVector4,
    Rational,
};
use thinsieve::semigroup::{
    cyclic_classes, enumerate_ball, for_each_in_ball, hensley_exponent, trace_multiplicity,
    NormBound, Parity,
};
use thinsieve::sieve::{remainder_profile, trace_discriminant_squarefree, SiftingSequence};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn reference_forms_1365() -> Vec<IndefiniteForm> {
    [(35, 35, -1), (7, 35, -5), (23, 33, -3), (19, 23, -11)]
        .iter()
        .map(|&(a, b, c)| IndefiniteForm::new(a, b, c).unwrap())
        .collect()
}

/// Index of the reference form whose class, up to the sign of `B`, is `cy`.
fn match_reference_form(cy: &FormCycle) -> Option<usize> {
    reference_forms_1365().iter().position(|g| {
        let flipped = IndefiniteForm::new(g.a, -g.b, g.c).unwrap();
        cy.contains(&reduce(g)) || cy.contains(&reduce(&flipped))
    })
}

fn distinct_reference_match(cycles: &[FormCycle]) -> Result<(), String> {
    let mut hit = Vec::new();
    for cy in cycles {
        let i = match_reference_form(cy).ok_or_else(|| format!("cycle {} matches no reference form", cy.key()))?;
        ensure(!hit.contains(&i), format!("two cycles match reference form {i}"))?;
        hit.push(i);
    }
    ensure(hit.len() == 4, format!("matched {} of the four reference classes", hit.len()))
}

fn criterion_1() -> Outcome {
    let words = [vec![1, 35], vec![5, 7], vec![1, 1, 1, 11], vec![1, 1, 1, 2, 1, 2]];
    let mut cycles: Vec<FormCycle> = Vec::new();
    for d in &words {
        let m = word_to_matrix(&word(d)).map_err(|e| e.to_string())?;
        ensure(m.trace() == 37, format!("{d:?} has trace {}", m.trace()))?;
        let f = reduce(&matrix_to_form(&m).map_err(|e| e.to_string())?);
        ensure(f.discriminant() == 1365, "discriminant")?;
        let cy = cycle(&f).map_err(|e| e.to_string())?;
        ensure(cycles.iter().all(|c| !c.contains(&f)), format!("{d:?} repeats a cycle"))?;
        cycles.push(cy);
    }
    distinct_reference_match(&cycles)?;
    Ok("four words of trace 37, four distinct cycles, one per reference class".into())
}

fn criterion_2() -> Outcome {
    let f = IndefiniteForm::new(19, 27, -8).map_err(|e| e.to_string())?;
    ensure(f.discriminant() == 1337, "discriminant")?;
    let cy = cycle(&reduce(&f)).map_err(|e| e.to_string())?;
    ensure(cy.len() == 18, format!("cycle length {}", cy.len()))?;
    let expected = word(&[1, 1, 2, 17, 1, 8, 5, 8, 1, 17, 2, 1, 1, 3, 1, 35, 1, 3]);
    let w = cycle_to_word(&cy);
    ensure(w.is_rotation_of(&expected), format!("cycle word {w}"))?;
    Ok(format!("cycle length 18, word {w}"))
}

fn criterion_3() -> Outcome {
    for p in [2u64, 3, 5, 7, 11, 13] {
        let (b, bb) = (beta(p).unwrap(), beta_bruteforce(p).unwrap());
        ensure(b == bb, format!("beta({p}) = {b} but brute force gives {bb}"))?;
        let expected = Rational::new(1, (p * p - 1) as i128);
        for t in [2i64, -2] {
            let r = rho_t_bruteforce(p, t).unwrap();
            ensure(r == expected, format!("rho_{t}({p}) = {r}"))?;
        }
    }
    let mut checked = 0;
    for q in (1..=1000u64).filter(|&q| is_squarefree(q)) {
        let nu = factorize(q).len() as u32 - u32::from(q % 2 == 0);
        let n = sqrt4_count(q).unwrap();
        ensure(n == 1 << nu, format!("sqrt4_count({q}) = {n}"))?;
        checked += 1;
    }
    Ok(format!("beta and rho exact for p <= 13; sqrt4_count on {checked} square-free q"))
}

fn criterion_4() -> Outcome {
    let mut worst_k: f64 = 0.0;
    for p in (2..=101u64).filter(|&p| is_prime(p)) {
        let bound = 2.0 * (p as f64).sqrt() + 1e-6;
        for a in 1..p as i64 {
            for b in 1..p as i64 {
                let k = kloosterman(a, b, p).unwrap().abs();
                ensure(k <= bound, format!("|K({a},{b};{p})| = {k}"))?;
                worst_k = worst_k.max(k / (2.0 * (p as f64).sqrt()));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_s: f64 = 0.0;
    for p in [2u64, 3, 5, 7, 11, 13] {
        let bound = 2.0 * (p as f64).powf(1.5) + 1e-6;
        let pi = p as i64;
        let samples: Vec<IntegerVector4> = if p <= 5 {
            let r = 0..pi;
            r.clone()
                .flat_map(|x| r.clone().flat_map(move |y| (0..pi).flat_map(move |z| (0..pi).map(move |w| (x, y, z, w)))))
                .map(|(x, y, z, w)| IntegerVector4::new(x, y, z, w))
                .collect()
        } else {
            (0..1000)
                .map(|_| {
                    IntegerVector4::new(rng.gen_range(0..pi), rng.gen_range(0..pi), rng.gen_range(0..pi), rng.gen_range(0..pi))
                })
                .collect()
        };
        for s in samples.into_iter().filter(|s| s.is_primitive_mod(p)) {
            let v = sl2_charsum(p, &s).unwrap().norm();
            ensure(v <= bound, format!("|S({p}, {s:?})| = {v}"))?;
            worst_s = worst_s.max(v / (2.0 * (p as f64).powf(1.5)));
        }
    }
    Ok(format!("max |K|/2sqrt(p) = {worst_k:.4}, max |S|/2p^1.5 = {worst_s:.4}"))
}

fn criterion_5() -> Outcome {
    let norms: Vec<f64> = [3.0, 3.5, 4.0, 4.5, 5.0].iter().map(|e: &f64| 10f64.powf(*e)).collect();
    let fit = hensley_exponent(2, &norms).map_err(|e| e.to_string())?;
    let d = estimate(2, 14, 1e-6).map_err(|e| e.to_string())?;
    let target = 2.0 * d.midpoint();
    ensure((fit.slope - target).abs() < 0.05, format!("slope {} vs {target}", fit.slope))?;
    Ok(format!("slope {:.4}, 2 * delta_2 midpoint {:.4}", fit.slope, target))
}

fn criterion_6() -> Outcome {
    let mut detail = Vec::new();
    for a in [20u64, 50] {
        let e = estimate(a, max_depth(a), 1e-4).map_err(|e| e.to_string())?;
        let target = large_alphabet_asymptotic(a);
        let gap = if e.contains(target) { 0.0 } else { (e.lower - target).abs().min((e.upper - target).abs()) };
        ensure(gap <= 0.02, format!("A={a}: [{}, {}] vs {target}", e.lower, e.upper))?;
        detail.push(format!("A={a} k={} [{:.5}, {:.5}] vs {target:.5}", e.depth, e.lower, e.upper));
    }
    Ok(detail.join("; "))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let mut seen = Vec::new();
    for (a, m_expected, classes_expected) in [(2u64, 6u64, 1usize), (11, 10, 2), (35, 14, 4)] {
        let m = trace_multiplicity(a, 37).map_err(|e| e.to_string())?;
        let classes = cyclic_classes(a, 37).map_err(|e| e.to_string())?;
        if m != m_expected {
            failures.push(format!("M_{a}(37) = {m}, expected {m_expected}"));
        }
        if classes.len() != classes_expected {
            let list: Vec<String> = classes.iter().map(Word::to_string).collect();
            failures.push(format!("A={a}: {} classes ({}), expected {classes_expected}", classes.len(), list.join(" | ")));
        }
        seen.push(format!("M_{a}={m}/{}", classes.len()));
    }
    let census = thinsieve::sieve::class_census(1365, 35).map_err(|e| e.to_string())?;
    if let Err(e) = distinct_reference_match(&census) {
        failures.push(format!("class census: {e}"));
    }
    if failures.is_empty() {
        Ok(seen.join(", "))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_8() -> Outcome {
    let h11 = max_height(&word(&[1, 1])).unwrap();
    ensure((h11 - 5f64.sqrt() / 2.0).abs() < 1e-9, format!("h(1,1) = {h11}"))?;
    let h135 = max_height(&word(&[1, 35])).unwrap();
    ensure((h135 - 1365f64.sqrt() / 2.0).abs() < 1e-9, format!("h(1,35) = {h135}"))?;
    let low = max_height_exact(&word(&[1, 1, 1, 2, 1, 2])).unwrap();
    ensure(low.cmp_rational(2, 1).is_lt(), "h(1,1,1,2,1,2) >= 2")?;
    let mut count = 0;
    for len in [2, 4, 6] {
        for w in words_of_length(3, len) {
            let a = w.max_digit() as i128;
            let h = max_height_exact(&w).unwrap();
            ensure(h.cmp_rational(a, 2).is_gt() && h.cmp_rational(a + 2, 2).is_lt(), format!("sandwich fails at {w}"))?;
            count += 1;
        }
    }
    Ok(format!("exact heights; sandwich on {count} words; h(1,1,1,2,1,2) = {:.6}", low.to_f64()))
}

fn criterion_9() -> Outcome {
    let mut summaries = Vec::new();
    for n in [1e3, 1e4] {
        let seq = SiftingSequence::from_ball(2, n).map_err(|e| e.to_string())?;
        let p = remainder_profile(&seq, 100).map_err(|e| e.to_string())?;
        let size = Rational::from_integer(seq.len() as i128);
        for r in &p.rows {
            ensure(r.expected == beta(r.q).unwrap() * size, format!("expected column at q={}", r.q))?;
            ensure(r.remainder == Rational::from_integer(r.count as i128) - r.expected, format!("remainder at q={}", r.q))?;
        }
        summaries.push(p.summary_f64());
    }
    ensure(summaries[1] < summaries[0], format!("summary {} at 1e4 vs {} at 1e3", summaries[1], summaries[0]))?;
    Ok(format!("sum|r|/|Pi| = {:.4} at N=1e3, {:.4} at N=1e4", summaries[0], summaries[1]))
}

fn criterion_10() -> Outcome {
    let mut counted = 0u64;
    let mut total = 0u64;
    let mut bad = None;
    let mut excluded_trace_four = 0u64;
    for_each_in_ball(2, NormBound::closed(1e4), Parity::Even, |w, m| {
        total += 1;
        let t = m.trace() as u64;
        if trace_discriminant_squarefree(t) {
            counted += 1;
            if !is_fundamental(t * t - 4).unwrap_or(false) && bad.is_none() {
                bad = Some(w.to_vec());
            }
        } else if t == 4 {
            excluded_trace_four += 1;
        }
    })
    .map_err(|e| e.to_string())?;
    ensure(counted > 0, "empty census")?;
    ensure(bad.is_none(), format!("counted word {bad:?} has non-fundamental discriminant"))?;
    let sq = word(&[1, 2, 1, 2]);
    let t = word_to_matrix(&sq).unwrap().trace() as u64;
    ensure(!trace_discriminant_squarefree(t), format!("(1,2)^2 has trace {t} and was counted"))?;
    ensure(!trace_discriminant_squarefree(4), "trace 4 counted")?;
    ensure(excluded_trace_four > 0, "no trace-4 element met")?;
    Ok(format!("{counted} of {total} elements counted; {excluded_trace_four} trace-4 elements excluded"))
}

fn criterion_11() -> Outcome {
    let mut compared = 0;
    for a in 1..=3u64 {
        for n in [2.0, 3.0, 5.0, 10.0, 17.0, 30.0, 42.5, 50.0] {
            for (parity, even) in [(Parity::Even, true), (Parity::Any, false)] {
                let mut got: Vec<_> = enumerate_ball(a, n, parity).map_err(|e| e.to_string())?;
                let mut want = bfs_ball(a, n, even);
                got.sort_by(|x, y| x.word.cmp(&y.word));
                want.sort_by(|x, y| x.word.cmp(&y.word));
                ensure(got == want, format!("A={a}, N={n}, {parity:?}: {} vs {}", got.len(), want.len()))?;
                compared += got.len();
            }
        }
    }
    let mut words = 0;
    for len in [2, 4, 6] {
        for w in words_of_length(4, len) {
            let x = fixed_point(&word_to_matrix(&w).unwrap()).map_err(|e| e.to_string())?;
            let e = x.cf_expand().map_err(|e| e.to_string())?;
            ensure(e.preperiod.is_empty(), format!("{w} has a preperiod"))?;
            let k = w.len() / e.period.len();
            let repeated = word(&e.period.digits().repeat(k));
            ensure(k * e.period.len() == w.len() && repeated.is_rotation_of(&w), format!("{w} -> {}", e.period))?;
            words += 1;
        }
    }
    Ok(format!("{compared} ball elements match the oracle; {words} words round-trip"))
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
    /// Set when the criterion's stated numbers are known to be wrong.
    known_defect: Option<&'static str>,
}

fn main() {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, title: "trace-37 dictionary at D=1365", budget: secs(1), run: criterion_1, known_defect: None },
        Criterion { id: 2, title: "D=1337 cycle and period", budget: secs(1), run: criterion_2, known_defect: None },
        Criterion { id: 3, title: "local densities", budget: secs(30), run: criterion_3, known_defect: None },
        Criterion { id: 4, title: "exponential sum bounds", budget: secs(60), run: criterion_4, known_defect: None },
        Criterion { id: 5, title: "Hensley exponent", budget: secs(300), run: criterion_5, known_defect: None },
        Criterion { id: 6, title: "dimension asymptotic", budget: secs(120), run: criterion_6, known_defect: None },
        Criterion {
            id: 7,
            title: "trace fiber at t=37",
            budget: secs(60),
            run: criterion_7,
            known_defect: Some("(5,7) has trace 37 and digits <= 11, so M_11(37) = 12 with 3 classes"),
        },
        Criterion { id: 8, title: "geodesic heights", budget: secs(30), run: criterion_8, known_defect: None },
        Criterion { id: 9, title: "remainder ledger", budget: secs(300), run: criterion_9, known_defect: None },
        Criterion { id: 10, title: "square-free census", budget: secs(300), run: criterion_10, known_defect: None },
        Criterion { id: 11, title: "oracle equivalence", budget: secs(120), run: criterion_11, known_defect: None },
    ];
    let mut unexpected = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if outcome.is_ok() && elapsed > c.budget {
            outcome = Err(format!("took {elapsed:.2?}, budget {:?}", c.budget));
        }
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        let note = match (c.known_defect, outcome.is_ok()) {
            (Some(why), false) => format!(" [known defect in the expected values: {why}]"),
            (Some(_), true) => " [known defect no longer reproduces]".to_string(),
            _ => String::new(),
        };
        println!("criterion {:>2} {status} {} ({elapsed:.2?}): {detail}{note}", c.id, c.title);
        if outcome.is_ok() == c.known_defect.is_some() {
            unexpected.push(c.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
