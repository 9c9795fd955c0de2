//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns a JSON string; the plain `*_json` functions hold the
//! logic so they can be tested off the browser.

use hplab::expansion::predict;
use hplab::poly::alpha_poly;
use hplab::report::prediction_report;
use hplab::{FiniteGroup, GroupSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Exhaustive counts above this order take too long for a page.
pub const BROWSER_COUNT_LIMIT: usize = 11;
pub const MAX_ALPHA: usize = 12;

#[derive(Serialize)]
struct AlphaRow {
    m: usize,
    poly: String,
    at_one: String,
}

#[derive(Serialize)]
struct CurvePoint {
    order: usize,
    ratio: f64,
}

#[derive(Serialize)]
struct Curve {
    group: String,
    n: usize,
    closed_first_order: f64,
    exact_ratio: Option<f64>,
    points: Vec<CurvePoint>,
}

fn build(spec: &str) -> Result<FiniteGroup, String> {
    spec.parse::<GroupSpec>()
        .and_then(|s| s.build())
        .map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn alpha_table_json(max_m: usize) -> Result<String, String> {
    if max_m > MAX_ALPHA {
        return Err(format!("at most {MAX_ALPHA} rows"));
    }
    let rows: Vec<AlphaRow> = (1..=max_m)
        .map(|m| {
            let p = alpha_poly(m);
            AlphaRow {
                m,
                poly: p.to_string(),
                at_one: p.eval_at_one().to_string(),
            }
        })
        .collect();
    to_json(&rows)
}

/// Invariants, both Hall-Paige criteria, the exact count when cheap and
/// the first-order prediction.
pub fn group_report_json(spec: &str) -> Result<String, String> {
    let g = build(spec)?;
    let report = prediction_report(&g, 1, Some(BROWSER_COUNT_LIMIT)).map_err(|e| e.to_string())?;
    to_json(&report)
}

/// Ratio predictions for orders `0..=max_order` next to the closed form.
pub fn prediction_curve_json(spec: &str, max_order: usize) -> Result<String, String> {
    let g = build(spec)?;
    let points = (0..=max_order)
        .map(|c| {
            predict(&g, c).map(|p| CurvePoint {
                order: c,
                ratio: p.ratio_f64(),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let exact_ratio = if g.order() <= BROWSER_COUNT_LIMIT {
        let r = prediction_report(&g, 0, Some(BROWSER_COUNT_LIMIT)).map_err(|e| e.to_string())?;
        r.exact_ratio.as_ref().map(hplab::rational::to_f64)
    } else {
        None
    };
    to_json(&Curve {
        group: g.name().to_string(),
        n: g.order(),
        closed_first_order: hplab::expansion::closed_first_order(&g),
        exact_ratio,
        points,
    })
}

#[wasm_bindgen]
pub fn alpha_table(max_m: usize) -> Result<String, JsValue> {
    alpha_table_json(max_m).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn group_report(spec: &str) -> Result<String, JsValue> {
    group_report_json(spec).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn prediction_curve(spec: &str, max_order: usize) -> Result<String, JsValue> {
    prediction_curve_json(spec, max_order).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn alpha_rows() {
        let v: Value = serde_json::from_str(&alpha_table_json(4).unwrap()).unwrap();
        assert_eq!(v[3]["poly"], "3t^2 + 6t^3");
        assert_eq!(v[3]["at_one"], "9");
        assert!(alpha_table_json(MAX_ALPHA + 1).is_err());
    }

    #[test]
    fn report_and_curve() {
        let v: Value = serde_json::from_str(&group_report_json("cyclic:7").unwrap()).unwrap();
        assert_eq!(v["exact_count"], "133");
        let big: Value = serde_json::from_str(&group_report_json("cyclic:13").unwrap()).unwrap();
        assert!(big["exact_count"].is_null());

        let c: Value =
            serde_json::from_str(&prediction_curve_json("quaternion", 2).unwrap()).unwrap();
        assert_eq!(c["points"].as_array().unwrap().len(), 3);
        assert!(c["exact_ratio"].is_number());
        assert!(prediction_curve_json("cyclic:5", 4).is_err());
        assert!(group_report_json("nope:3").is_err());
    }
}
