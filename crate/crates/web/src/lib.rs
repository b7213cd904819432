//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns a JSON string. The plain `*_json` functions carry the
//! logic so they can be tested off the browser.

use std::str::FromStr;

use serde_json::json;
use wasm_bindgen::prelude::*;

use thinsieve::cf::Word;
use thinsieve::dimension::{estimate, large_alphabet_asymptotic, max_depth};
use thinsieve::forms::{class_counts, cycle_to_word, wide_classes};
use thinsieve::geodesic::{emit_arcs, GeodesicProfile};
use thinsieve::modular::fmt_rational;

/// Arcs of the closed geodesic of a word such as `1,1,1,2,1,2`.
pub fn geodesic_json(word: &str) -> Result<String, String> {
    let w = Word::from_str(word).map_err(|e| e.to_string())?;
    let arcs = emit_arcs(&w).map_err(|e| e.to_string())?;
    let profile = GeodesicProfile::new(&w).map_err(|e| e.to_string())?;
    let arcs: Vec<_> = arcs
        .iter()
        .map(|a| {
            json!({
                "rotation": a.rotation,
                "alpha": a.alpha.to_string(),
                "center": fmt_rational(&a.center),
                "x": a.center_f64(),
                "r": a.radius(),
            })
        })
        .collect();
    Ok(json!({
        "word": w.digits(),
        "discriminant": profile.discriminant,
        "maxHeight": profile.max_height,
        "arcs": arcs,
    })
    .to_string())
}

/// Dimension bracket, with the depth clamped to what the budget allows.
pub fn dimension_json(alphabet: u64, depth: u32) -> Result<String, String> {
    let k = depth.min(max_depth(alphabet)).max(2);
    let e = estimate(alphabet, k, 1e-6).map_err(|e| e.to_string())?;
    Ok(json!({
        "alphabet": alphabet,
        "depth": k,
        "lower": e.lower,
        "upper": e.upper,
        "asymptotic": large_alphabet_asymptotic(alphabet),
    })
    .to_string())
}

/// Wide classes of a discriminant, each with its reduced cycle and word.
pub fn class_cycles_json(d: u64) -> Result<String, String> {
    let d = d as i128;
    let counts = class_counts(d).map_err(|e| e.to_string())?;
    let groups = wide_classes(d).map_err(|e| e.to_string())?;
    let classes: Vec<_> = groups
        .iter()
        .map(|g| {
            let c = &g[0];
            json!({
                "key": c.key().to_string(),
                "length": c.len(),
                "narrowCycles": g.len(),
                "word": cycle_to_word(c).digits(),
            })
        })
        .collect();
    Ok(json!({
        "discriminant": d,
        "narrow": counts.narrow,
        "wide": counts.wide,
        "classes": classes,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn geodesic(word: &str) -> Result<String, JsError> {
    geodesic_json(word).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dimension(alphabet: u32, depth: u32) -> Result<String, JsError> {
    dimension_json(alphabet as u64, depth).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = classCycles)]
pub fn class_cycles(d: u32) -> Result<String, JsError> {
    class_cycles_json(d as u64).map_err(|e| JsError::new(&e))
}
