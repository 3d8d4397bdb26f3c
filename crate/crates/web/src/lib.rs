//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string; the `*_json` functions do the work and
//! are callable natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use univoque::dimension::{plateau_from_word, sweep, sweep_grid, SandwichConfig};
use univoque::expansions::{classify_univoque, quasi_greedy_alpha};
use univoque::interval::{decimal_string, parse_rational, to_f64};
use univoque::{Alphabet, Base, Rational, UnivoqueStatus, Word};

const WIDTH_DENOM: u64 = 1 << 40;

fn width() -> Rational {
    Rational::new(1.into(), WIDTH_DENOM.into())
}

fn err(e: univoque::Error) -> String {
    e.to_string()
}

/// Digits of `α(q)` and the classification of `q`.
pub fn alpha_json(q: &str, m: u8, len: usize) -> Result<String, String> {
    let base = Base::parse(q, Alphabet::new(m).map_err(err)?, &width()).map_err(err)?;
    let a = quasi_greedy_alpha(&base, len.clamp(1, 256)).map_err(err)?;
    let status = match classify_univoque(&base, 48).map_err(err)? {
        UnivoqueStatus::InU => "in U".to_string(),
        UnivoqueStatus::InClosureOnly => "in the closure of U only".to_string(),
        UnivoqueStatus::Outside => "outside U".to_string(),
        UnivoqueStatus::UnknownAtDepth(d) => format!("undecided at depth {d}"),
    };
    Ok(json!({
        "digits": a.word().to_string(),
        "exact": a.exact_sequence().map(|s| s.to_string()),
        "q_lo": decimal_string(base.lo(), 12, false),
        "q_hi": decimal_string(base.hi(), 12, true),
        "status": status,
    })
    .to_string())
}

/// Dimension bounds on `steps + 1` evenly spaced bases, as plot points.
pub fn curve_json(from: &str, to: &str, steps: usize, m: u8, n_max: usize) -> Result<String, String> {
    let alphabet = Alphabet::new(m).map_err(err)?;
    let grid = sweep_grid(
        &parse_rational(from).map_err(err)?,
        &parse_rational(to).map_err(err)?,
        steps.min(200),
        alphabet,
    )
    .map_err(err)?;
    let n_max = n_max.clamp(4, 14);
    let mut cfg = SandwichConfig::new(Rational::new(1.into(), 1000.into()), n_max);
    cfg.stop_early = false;
    cfg.lengths = Some(
        (1..=n_max / 4)
            .map(|i| 4 * i)
            .chain((n_max % 4 != 0).then_some(n_max))
            .collect(),
    );
    let points: Vec<Value> = sweep(&grid, &cfg)
        .iter()
        .map(|row| match &row.outcome {
            Ok(e) => json!({
                "q": row.q.mid_f64(),
                "dim_lo": to_f64(&e.dim_lower),
                "dim_hi": to_f64(&e.dim_upper),
                "status": row.status(),
            }),
            Err(_) => json!({ "q": row.q.mid_f64(), "status": row.status() }),
        })
        .collect();
    Ok(Value::Array(points).to_string())
}

/// The plateau `[q_L, q_R]` generated by a primitive word.
pub fn plateau_json(word: &str, m: u8) -> Result<String, String> {
    let w = Word::parse(word, Alphabet::new(m).map_err(err)?).map_err(err)?;
    let p = plateau_from_word(&w, &width()).map_err(err)?;
    Ok(json!({
        "q_l": [decimal_string(p.q_l.lo(), 12, false), decimal_string(p.q_l.hi(), 12, true)],
        "q_r": [decimal_string(p.q_r.lo(), 12, false), decimal_string(p.q_r.hi(), 12, true)],
        "alpha_q_l": p.left_sequence().map_err(err)?.to_string(),
        "alpha_q_r": p.right_sequence().map_err(err)?.to_string(),
        "exceeds_kl": p.exceeds_kl,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn alpha(q: &str, m: u8, len: usize) -> Result<String, JsError> {
    alpha_json(q, m, len).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn curve(from: &str, to: &str, steps: usize, m: u8, n_max: usize) -> Result<String, JsError> {
    curve_json(from, to, steps, m, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn plateau(word: &str, m: u8) -> Result<String, JsError> {
    plateau_json(word, m).map_err(|e| JsError::new(&e))
}
