//! Serialization helpers and report records.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::counting::count_complete_mappings_limited;
use crate::error::Result as HpResult;
use crate::expansion::{closed_first_order, predict};
use crate::group::FiniteGroup;
use crate::rational::to_f64;

pub fn ser_ratio_u64<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

pub fn ser_big_ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

/// `p/q`, always with an explicit denominator.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Fifteen significant digits in scientific notation.
pub fn float15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.14e}")
}

fn ser_opt_big_ratio<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&rational_string(r)),
        None => s.serialize_none(),
    }
}

/// One order of the staged prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePrediction {
    pub order: usize,
    /// Support cutoff used by the umbral operator.
    pub m: usize,
    #[serde(serialize_with = "ser_big_ratio")]
    pub ratio: BigRational,
    pub ratio_float: f64,
    pub count_float: f64,
    /// `exact / count - 1`, when the exact count is known.
    pub residual: Option<f64>,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub group: String,
    pub n: usize,
    pub abelianization_order: usize,
    #[serde(serialize_with = "ser_ratio_u64")]
    pub involution_fraction: Ratio<u64>,
    pub hall_paige_product: bool,
    pub hall_paige_sylow: bool,
    pub exact_count: Option<String>,
    pub count_millis: Option<f64>,
    /// `|G^ab| n!^2 / n^n`.
    #[serde(serialize_with = "ser_big_ratio")]
    pub scale: BigRational,
    /// Exact count divided by the scale.
    #[serde(serialize_with = "ser_opt_big_ratio")]
    pub exact_ratio: Option<BigRational>,
    pub closed_first_order: f64,
    pub stages: Vec<StagePrediction>,
}

/// Returns a closure giving the milliseconds elapsed since the call. The
/// browser target has no clock, so there it always reads 0.
#[cfg(not(target_arch = "wasm32"))]
fn stopwatch() -> impl FnOnce() -> f64 {
    let t = std::time::Instant::now();
    move || t.elapsed().as_secs_f64() * 1e3
}

#[cfg(target_arch = "wasm32")]
fn stopwatch() -> impl FnOnce() -> f64 {
    || 0.0
}

/// Predictions for orders `0..=max_order`; the exact count is included when
/// `count_limit` admits the group order.
pub fn prediction_report(
    g: &FiniteGroup,
    max_order: usize,
    count_limit: Option<usize>,
) -> HpResult<PredictionReport> {
    let inv = g.invariants();
    let (exact, count_millis) = match count_limit {
        Some(limit) if g.order() <= limit => {
            let elapsed = stopwatch();
            let c = count_complete_mappings_limited(g, limit)?;
            (Some(BigInt::from(c)), Some(elapsed()))
        }
        _ => (None, None),
    };
    let mut stages = Vec::new();
    let mut scale = None;
    for order in 0..=max_order {
        let elapsed = stopwatch();
        let p = predict(g, order)?;
        let residual = exact.as_ref().and_then(|e| {
            (!p.count.is_zero())
                .then(|| to_f64(&(BigRational::from_integer(e.clone()) / &p.count)) - 1.0)
        });
        stages.push(StagePrediction {
            order,
            m: p.params.m,
            ratio_float: p.ratio_f64(),
            count_float: p.count_f64(),
            ratio: p.ratio,
            residual,
            millis: elapsed(),
        });
        scale = Some(p.scale);
    }
    let scale = scale.unwrap_or_else(|| crate::expansion::count_scale(g));
    Ok(PredictionReport {
        group: g.name().to_string(),
        n: g.order(),
        abelianization_order: inv.abelianization_order,
        involution_fraction: inv.involution_fraction,
        hall_paige_product: inv.product_condition,
        hall_paige_sylow: inv.sylow_condition,
        exact_ratio: exact
            .as_ref()
            .map(|e| BigRational::from_integer(e.clone()) / &scale),
        exact_count: exact.map(|e| e.to_string()),
        count_millis,
        scale,
        closed_first_order: closed_first_order(g),
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::rational::ratio;

    #[test]
    fn formats() {
        assert_eq!(rational_string(&ratio(4, 6)), "2/3");
        assert_eq!(rational_string(&ratio(3, 1)), "3/1");
        assert_eq!(float15(0.5), "5.00000000000000e-1");
        assert_eq!(float15(0.0), "0");
    }

    #[test]
    fn report_fields() {
        let g = "cyclic:7".parse::<GroupSpec>().unwrap().build().unwrap();
        let r = prediction_report(&g, 1, Some(13)).unwrap();
        assert_eq!(r.exact_count.as_deref(), Some("133"));
        assert_eq!(r.stages.len(), 2);
        assert!(r.stages.iter().all(|s| s.residual.is_some()));
        let bare = prediction_report(&g, 0, None).unwrap();
        assert!(bare.exact_count.is_none() && bare.stages[0].residual.is_none());
        let hp = prediction_report(
            &"cyclic:4".parse::<GroupSpec>().unwrap().build().unwrap(),
            0,
            Some(13),
        )
        .unwrap();
        assert_eq!(hp.exact_count.as_deref(), Some("0"));
        assert_eq!(hp.stages[0].residual, Some(-1.0));
    }
}
