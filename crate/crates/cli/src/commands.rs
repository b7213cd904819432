use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use thinsieve::arith::{factorize, prime_divisors};
use thinsieve::cf::Word;
use thinsieve::dimension::{estimate, large_alphabet_asymptotic, max_depth};
use thinsieve::forms::{class_counts, cycle_to_word, wide_classes, FormCycle};
use thinsieve::geodesic::{arcs_csv, max_height, GeodesicProfile};
use thinsieve::geodesic::emit_arcs;
use thinsieve::modular::{
    beta, beta_bruteforce, fmt_rational, kloosterman, rho_t_bruteforce, sl2_charsum, sqrt4_count,
    IntegerVector4, DEFAULT_MODULUS_CAP,
};
use thinsieve::semigroup::{
    aleph_construct, aleph_error, build_fixed_length_ball, build_pi, cyclic_classes, enumerate_ball,
    hensley_exponent, trace_fiber, BilinearSet, Parity, SemigroupElement,
};
use thinsieve::sieve::{
    almost_prime_census, class_census, discriminant_census, discriminant_csv, remainder_profile,
    squarefree_trace_census, SiftingSequence,
};

use crate::config::Settings;
use crate::{Artifact, Ball, CliError, Command, Format, PiArgs};

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value") + "\n"
}

fn words_json(elems: &[SemigroupElement]) -> Value {
    elems.iter().map(|e| json!(e.word.digits())).collect()
}

fn summary(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn ball_args(s: &mut Settings, b: &Ball, default_norm: f64) -> Result<(u64, f64), CliError> {
    let alphabet = s.get("alphabet", b.alphabet.as_deref(), 2u64)?;
    let norm = s.get("norm", b.norm.as_deref(), default_norm)?;
    Ok((alphabet, norm))
}

fn cycle_json(c: &FormCycle) -> Value {
    serde_json::from_str(&c.to_json()).expect("cycle json")
}

pub fn dispatch(
    cmd: &Command,
    s: &mut Settings,
    format: Format,
    seed: u64,
) -> Result<(Artifact, Option<String>), CliError> {
    let artifact = match cmd {
        Command::Enumerate { ball, parity } => {
            let (alphabet, norm) = ball_args(s, ball, 100.0)?;
            let parity = match s.get::<String>("parity", parity.as_deref(), "even".into())?.as_str() {
                "even" => Parity::Even,
                "any" => Parity::Any,
                p => return Err(CliError::Config(format!("parity must be even or any, not {p:?}"))),
            };
            let elems = enumerate_ball(alphabet, norm, parity)?;
            let sum = summary(&[("count", elems.len().to_string())]);
            match format {
                Format::Json => Artifact {
                    ext: "jsonl",
                    body: elems.iter().map(|e| e.to_json_line() + "\n").collect(),
                    summary: sum,
                },
                Format::Csv => {
                    let rows: Vec<Vec<String>> = elems
                        .iter()
                        .map(|e| {
                            let m = e.matrix;
                            vec![e.word.to_string(), e.trace().to_string(), e.norm_sq().to_string(),
                                m.a.to_string(), m.b.to_string(), m.c.to_string(), m.d.to_string()]
                        })
                        .collect();
                    Artifact { ext: "csv", body: csv_table(&["word", "trace", "normSq", "a", "b", "c", "d"], &rows), summary: sum }
                }
            }
        }
        Command::TraceFiber { alphabet, trace } => {
            let alphabet = s.get("alphabet", alphabet.as_deref(), 2u64)?;
            let t = s.require::<u64>("trace", trace.as_deref())?;
            let fiber = trace_fiber(alphabet, t)?;
            let classes = cyclic_classes(alphabet, t)?;
            let sum = summary(&[("multiplicity", fiber.len().to_string()), ("classes", classes.len().to_string())]);
            match format {
                Format::Json => Artifact {
                    ext: "json",
                    body: pretty(&json!({
                        "alphabet": alphabet,
                        "trace": t,
                        "multiplicity": fiber.len(),
                        "classes": classes.iter().map(|w| json!(w.digits())).collect::<Vec<_>>(),
                        "words": fiber.iter().map(|w| json!(w.digits())).collect::<Vec<_>>(),
                    })),
                    summary: sum,
                },
                Format::Csv => {
                    let rows: Vec<Vec<String>> =
                        fiber.iter().map(|w| vec![w.to_string(), w.canonical_rotation().to_string()]).collect();
                    Artifact { ext: "csv", body: csv_table(&["word", "class"], &rows), summary: sum }
                }
            }
        }
        Command::HensleyFit { alphabet, norms } => {
            let alphabet = s.get("alphabet", alphabet.as_deref(), 2u64)?;
            let norms = s.list::<f64>("norms", norms.as_deref(), "1e3,3162.2776601683795,1e4,31622.776601683792,1e5")?;
            let fit = hensley_exponent(alphabet, &norms)?;
            let sum = summary(&[
                ("slope", fit.slope.to_string()),
                ("intercept", fit.intercept.to_string()),
                ("residual", fit.residual.to_string()),
            ]);
            match format {
                Format::Json => Artifact { ext: "json", body: pretty(&json!(fit)), summary: sum },
                Format::Csv => {
                    let rows: Vec<Vec<String>> = fit
                        .norms
                        .iter()
                        .zip(&fit.counts)
                        .map(|(n, c)| vec![alphabet.to_string(), n.to_string(), c.to_string()])
                        .collect();
                    Artifact { ext: "csv", body: csv_table(&["alphabet", "N", "count"], &rows), summary: sum }
                }
            }
        }
        Command::Dimension { alphabet, depth, tol } => {
            let alphabets = s.list::<u64>("alphabet", alphabet.as_deref(), "2")?;
            let depth = s.get("depth", depth.as_deref(), 12u64)? as u32;
            let tol = s.get("tol", tol.as_deref(), 1e-6)?;
            let mut rows = Vec::new();
            let mut estimates = Vec::new();
            for &a in &alphabets {
                let k = depth.min(max_depth(a)).max(2);
                let e = estimate(a, k, tol)?;
                rows.push(vec![
                    a.to_string(),
                    k.to_string(),
                    e.lower.to_string(),
                    e.upper.to_string(),
                    large_alphabet_asymptotic(a).to_string(),
                ]);
                estimates.push(e);
            }
            let sum = estimates
                .iter()
                .map(|e| (format!("delta_{}", e.alphabet), format!("[{}, {}]", e.lower, e.upper)))
                .collect();
            match format {
                Format::Json => Artifact { ext: "json", body: pretty(&json!(estimates)), summary: sum },
                Format::Csv => Artifact {
                    ext: "csv",
                    body: csv_table(&["alphabet", "depth", "lower", "upper", "asymptotic"], &rows),
                    summary: sum,
                },
            }
        }
        Command::Densities { modulus } => {
            let q = s.require::<u64>("modulus", modulus.as_deref())?;
            let total = beta(q)?;
            let mut rows = Vec::new();
            for p in prime_divisors(q) {
                let brute = |f: &dyn Fn() -> thinsieve::Result<String>| -> Result<String, CliError> {
                    if p > DEFAULT_MODULUS_CAP { Ok(String::new()) } else { Ok(f()?) }
                };
                rows.push(vec![
                    p.to_string(),
                    fmt_rational(&beta(p)?),
                    brute(&|| beta_bruteforce(p).map(|r| fmt_rational(&r)))?,
                    sqrt4_count(p)?.to_string(),
                    brute(&|| rho_t_bruteforce(p, 2).map(|r| fmt_rational(&r)))?,
                    brute(&|| rho_t_bruteforce(p, -2).map(|r| fmt_rational(&r)))?,
                ]);
            }
            if factorize(q).len() != 1 {
                rows.push(vec![q.to_string(), fmt_rational(&total), String::new(), sqrt4_count(q)?.to_string(), String::new(), String::new()]);
            }
            let header = ["modulus", "beta", "beta_bruteforce", "sqrt4_count", "rho_plus2", "rho_minus2"];
            let sum = summary(&[("beta", fmt_rational(&total)), ("sqrt4_count", sqrt4_count(q)?.to_string())]);
            match format {
                Format::Csv => Artifact { ext: "csv", body: csv_table(&header, &rows), summary: sum },
                Format::Json => {
                    let objs: Vec<Value> = rows
                        .iter()
                        .map(|r| Value::Object(header.iter().zip(r).map(|(h, v)| (h.to_string(), json!(v))).collect()))
                        .collect();
                    Artifact { ext: "json", body: pretty(&json!(objs)), summary: sum }
                }
            }
        }
        Command::Expsum { kind, modulus, samples } => {
            let kind = s.get::<String>("kind", kind.as_deref(), "kloosterman".into())?;
            let q = s.require::<u64>("modulus", modulus.as_deref())?;
            let samples = s.get("samples", samples.as_deref(), 1000u64)?;
            let (header, rows, worst): (Vec<&str>, Vec<Vec<String>>, f64) = match kind.as_str() {
                "kloosterman" => {
                    let bound = 2.0 * (q as f64).sqrt();
                    let mut rows = Vec::new();
                    let mut worst: f64 = 0.0;
                    for a in 1..q as i64 {
                        for b in 1..q as i64 {
                            let k = kloosterman(a, b, q)?;
                            worst = worst.max(k.abs() / bound);
                            rows.push(vec![a.to_string(), b.to_string(), k.to_string()]);
                        }
                    }
                    (vec!["a", "b", "value"], rows, worst)
                }
                "charsum" => {
                    let nu = factorize(q).len() as i32;
                    let bound = 2f64.powi(nu) * (q as f64).powf(1.5);
                    let qi = q as i64;
                    let vectors: Vec<IntegerVector4> = if (q as u128).pow(4) <= samples as u128 {
                        (0..qi.pow(4))
                            .map(|i| IntegerVector4::new(i / qi.pow(3), (i / qi.pow(2)) % qi, (i / qi) % qi, i % qi))
                            .collect()
                    } else {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        (0..samples)
                            .map(|_| IntegerVector4::new(rng.gen_range(0..qi), rng.gen_range(0..qi), rng.gen_range(0..qi), rng.gen_range(0..qi)))
                            .collect()
                    };
                    let mut rows = Vec::new();
                    let mut worst: f64 = 0.0;
                    for v in vectors.iter().filter(|v| v.is_primitive_mod(q)) {
                        let z = sl2_charsum(q, v)?;
                        worst = worst.max(z.norm() / bound);
                        rows.push(vec![v.x.to_string(), v.y.to_string(), v.z.to_string(), v.w.to_string(),
                            z.re.to_string(), z.im.to_string(), z.norm().to_string()]);
                    }
                    (vec!["x", "y", "z", "w", "re", "im", "abs"], rows, worst)
                }
                k => return Err(CliError::Config(format!("kind must be kloosterman or charsum, not {k:?}"))),
            };
            let sum = summary(&[("rows", rows.len().to_string()), ("max_ratio_to_bound", worst.to_string())]);
            match format {
                Format::Csv => Artifact { ext: "csv", body: csv_table(&header, &rows), summary: sum },
                Format::Json => Artifact {
                    ext: "json",
                    body: pretty(&json!({"kind": kind, "modulus": q, "header": header, "rows": rows})),
                    summary: sum,
                },
            }
        }
        Command::Aleph { norm, modulus, check } => {
            let y = s.get("norm", norm.as_deref(), 1e6)?;
            let b = s.get("modulus", modulus.as_deref(), 2u64)?;
            let checks = s.list::<u64>("check", check.as_deref(), "2,3,5")?;
            let aleph = aleph_construct(y, b)?;
            let errors = checks
                .iter()
                .map(|&q| Ok((q, aleph_error(&aleph.elements, q)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut sum = summary(&[("size", aleph.len().to_string()), ("seed_radius", aleph.seed_radius.to_string())]);
            sum.extend(errors.iter().map(|(q, e)| (format!("error_mod_{q}"), e.to_string())));
            match format {
                Format::Json => Artifact {
                    ext: "json",
                    body: pretty(&json!({
                        "normBound": y,
                        "modulus": b,
                        "seedRadius": aleph.seed_radius,
                        "popularSize": aleph.popular_size,
                        "pivot": aleph.pivot.as_ref().map(|w| json!(w.digits())),
                        "representatives": aleph.representatives.iter().map(|w| json!(w.digits())).collect::<Vec<_>>(),
                        "elements": words_json(&aleph.elements),
                        "errors": errors.iter().map(|(q, e)| json!({"q": q, "error": e})).collect::<Vec<_>>(),
                    })),
                    summary: sum,
                },
                Format::Csv => {
                    let rows: Vec<Vec<String>> = aleph
                        .elements
                        .iter()
                        .map(|e| vec![e.word.to_string(), e.trace().to_string(), e.norm_sq().to_string()])
                        .collect();
                    Artifact { ext: "csv", body: csv_table(&["word", "trace", "normSq"], &rows), summary: sum }
                }
            }
        }
        Command::BuildPi { ball, pi } => {
            let set = pi_from_args(s, ball, pi)?;
            let (mut lo, mut hi) = (i128::MAX, i128::MIN);
            set.for_each_trace(|t| {
                lo = lo.min(t);
                hi = hi.max(t);
            });
            let sum = summary(&[
                ("size", set.len().to_string()),
                ("xi", set.xi.len().to_string()),
                ("aleph", set.aleph.len().to_string()),
                ("omega", set.omega.len().to_string()),
                ("trace_min", lo.to_string()),
                ("trace_max", hi.to_string()),
            ]);
            match format {
                Format::Json => Artifact {
                    ext: "json",
                    body: pretty(&json!({
                        "size": set.len(),
                        "xi": words_json(&set.xi),
                        "aleph": words_json(&set.aleph),
                        "omega": words_json(&set.omega),
                        "traceMin": lo.to_string(),
                        "traceMax": hi.to_string(),
                    })),
                    summary: sum,
                },
                Format::Csv => {
                    let mut rows = Vec::new();
                    for (label, part) in [("xi", &set.xi), ("aleph", &set.aleph), ("omega", &set.omega)] {
                        rows.extend(part.iter().map(|e| vec![label.to_string(), e.word.to_string(), e.trace().to_string()]));
                    }
                    Artifact { ext: "csv", body: csv_table(&["factor", "word", "trace"], &rows), summary: sum }
                }
            }
        }
        Command::SieveRemainders { ball, cutoff, source, pi } => {
            let cutoff = s.get("cutoff", cutoff.as_deref(), 100u64)?;
            let seq = match s.get::<String>("source", source.as_deref(), "ball".into())?.as_str() {
                "ball" => {
                    let (alphabet, norm) = ball_args(s, ball, 1e4)?;
                    SiftingSequence::from_ball(alphabet, norm)?
                }
                "pi" => SiftingSequence::from_bilinear(&pi_from_args(s, ball, pi)?)?,
                other => return Err(CliError::Config(format!("source must be ball or pi, not {other:?}"))),
            };
            let profile = remainder_profile(&seq, cutoff)?;
            let sum = summary(&[
                ("size", seq.len().to_string()),
                ("sum_abs_r_over_size", fmt_rational(&profile.summary)),
                ("sum_abs_r_over_size_f64", profile.summary_f64().to_string()),
            ]);
            match format {
                Format::Csv => Artifact { ext: "csv", body: profile.to_csv(), summary: sum },
                Format::Json => Artifact {
                    ext: "json",
                    body: pretty(&json!({
                        "size": seq.len(),
                        "cutoff": cutoff,
                        "summary": fmt_rational(&profile.summary),
                        "rows": profile.rows.iter().map(|r| json!({
                            "q": r.q,
                            "count": r.count,
                            "expected": fmt_rational(&r.expected),
                            "remainder": fmt_rational(&r.remainder),
                        })).collect::<Vec<_>>(),
                    })),
                    summary: sum,
                },
            }
        }
        Command::AlmostPrime { ball, z } => {
            let (alphabet, norm) = ball_args(s, ball, 1e4)?;
            let z = s.get("z", z.as_deref(), 10u64)?;
            let seq = SiftingSequence::from_ball(alphabet, norm)?;
            let count = almost_prime_census(&seq, z);
            let row = vec![alphabet.to_string(), norm.to_string(), z.to_string(), seq.len().to_string(), count.to_string()];
            tabular(format, &["alphabet", "N", "z", "size", "count"], vec![row], summary(&[("count", count.to_string())]))
        }
        Command::SquarefreeCount { ball } => {
            let (alphabet, norm) = ball_args(s, ball, 1e4)?;
            let c = squarefree_trace_census(alphabet, norm)?;
            let row = vec![
                alphabet.to_string(),
                norm.to_string(),
                c.ball_count.to_string(),
                c.squarefree_count.to_string(),
                fmt_rational(&c.fraction()),
            ];
            let sum = summary(&[("squarefree", c.squarefree_count.to_string()), ("fraction", fmt_rational(&c.fraction()))]);
            tabular(format, &["alphabet", "N", "ball_count", "squarefree_count", "fraction"], vec![row], sum)
        }
        Command::Discriminants { alphabet, t_bound, min_mult } => {
            let alphabet = s.get("alphabet", alphabet.as_deref(), 2u64)?;
            let t_cap = s.get("t-bound", t_bound.as_deref(), 1_000_000u64)?;
            let m = s.get("min-mult", min_mult.as_deref(), 1u64)?;
            let rows = discriminant_census(alphabet, t_cap, |_| m)?;
            let sum = summary(&[("count", rows.len().to_string())]);
            match format {
                Format::Csv => Artifact { ext: "csv", body: discriminant_csv(&rows), summary: sum },
                Format::Json => Artifact { ext: "json", body: pretty(&json!(rows)), summary: sum },
            }
        }
        Command::ClassCensus { disc, alphabet } => {
            let d = s.require::<u64>("disc", disc.as_deref())?;
            let alphabet = s.get("alphabet", alphabet.as_deref(), 2u64)?;
            let cycles = class_census(d, alphabet)?;
            let sum = summary(&[("classes", cycles.len().to_string())]);
            cycles_artifact(format, cycles.iter().enumerate().collect(), sum)?
        }
        Command::ClassCycles { disc, narrow } => {
            let d = s.require::<u64>("disc", disc.as_deref())? as i128;
            let counts = class_counts(d)?;
            let groups = wide_classes(d)?;
            let listed: Vec<(usize, &FormCycle)> = if *narrow {
                groups.iter().enumerate().flat_map(|(i, g)| g.iter().map(move |c| (i, c))).collect()
            } else {
                groups.iter().enumerate().map(|(i, g)| (i, &g[0])).collect()
            };
            let sum = summary(&[("narrow", counts.narrow.to_string()), ("wide", counts.wide.to_string())]);
            cycles_artifact(format, listed, sum)?
        }
        Command::Geodesic { word, emit } => {
            let text = s.require::<String>("word", word.as_deref())?;
            let w = Word::from_str(&text)?;
            let emit = s.optional("emit", emit.as_deref());
            let json_wanted = match &emit {
                Some(path) => path.ends_with(".json"),
                None => format == Format::Json,
            };
            let profile = GeodesicProfile::new(&w)?;
            let sum = summary(&[
                ("max_height", profile.max_height.to_string()),
                ("discriminant", profile.discriminant.to_string()),
            ]);
            let artifact = if json_wanted {
                Artifact { ext: "json", body: pretty(&json!(profile)), summary: sum }
            } else {
                Artifact { ext: "csv", body: arcs_csv(&emit_arcs(&w)?), summary: sum }
            };
            return Ok((artifact, emit));
        }
    };
    Ok((artifact, None))
}

fn tabular(format: Format, header: &[&str], rows: Vec<Vec<String>>, sum: Vec<(String, String)>) -> Artifact {
    match format {
        Format::Csv => Artifact { ext: "csv", body: csv_table(header, &rows), summary: sum },
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| Value::Object(header.iter().zip(r).map(|(h, v)| (h.to_string(), json!(v))).collect()))
                .collect();
            Artifact { ext: "json", body: pretty(&json!(objs)), summary: sum }
        }
    }
}

fn cycles_artifact(format: Format, cycles: Vec<(usize, &FormCycle)>, sum: Vec<(String, String)>) -> Result<Artifact, CliError> {
    Ok(match format {
        Format::Json => Artifact {
            ext: "json",
            body: pretty(&Value::Array(
                cycles
                    .iter()
                    .map(|(i, c)| {
                        let mut v = cycle_json(c);
                        v["class"] = json!(i);
                        v
                    })
                    .collect(),
            )),
            summary: sum,
        },
        Format::Csv => {
            let rows = cycles
                .iter()
                .map(|(i, c)| {
                    let w = cycle_to_word(c);
                    Ok(vec![
                        i.to_string(),
                        c.key().to_string(),
                        c.len().to_string(),
                        w.to_string(),
                        max_height(&w)?.to_string(),
                    ])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Artifact { ext: "csv", body: csv_table(&["class", "key", "length", "word", "max_height"], &rows), summary: sum }
        }
    })
}

fn pi_from_args(s: &mut Settings, ball: &Ball, pi: &PiArgs) -> Result<BilinearSet, CliError> {
    let (alphabet, y) = ball_args(s, ball, 1e6)?;
    let xi_norm = s.get("xi-norm", pi.xi_norm.as_deref(), 30.0)?;
    let omega_norm = s.get("omega-norm", pi.omega_norm.as_deref(), 30.0)?;
    let b = s.get("modulus", pi.modulus.as_deref(), 2u64)?;
    let xi = build_fixed_length_ball(alphabet, xi_norm, "xi")?.elements;
    let omega = build_fixed_length_ball(alphabet, omega_norm, "omega")?.elements;
    let aleph = aleph_construct(y, b)?.elements;
    Ok(build_pi(xi, aleph, omega)?)
}
