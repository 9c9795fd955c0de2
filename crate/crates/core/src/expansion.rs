//! The umbral functional, the connected-system series of a group, and the
//! staged predictions of its complete-mapping count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::counting::{collision_stats, TargetFunction};
use crate::enumerate::{enumerate_connected, ConnectedClass, DEFAULT_MAX_CX};
use crate::error::{Error, Result};
use crate::gamma::GammaEngine;
use crate::group::FiniteGroup;
use crate::rational::{factorial, falling, pow_i, to_f64};
use crate::series::BivariateSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UmbralParams {
    pub n: usize,
    /// Largest surviving power of `u`.
    pub m: usize,
    /// Largest surviving power of `z`.
    pub c: usize,
}

impl UmbralParams {
    pub fn new(n: usize, m: usize, c: usize) -> Result<Self> {
        if m > n {
            return Err(Error::BadParams(format!(
                "u cutoff {m} exceeds group order {n}"
            )));
        }
        Ok(UmbralParams { n, m, c })
    }

    /// `m = min(n, max(2C + 2, ceil((ln n)^2)))`.
    pub fn standard(n: usize, c: usize) -> Self {
        let log_sq = if n <= 1 {
            0
        } else {
            (n as f64).ln().powi(2).ceil() as usize
        };
        UmbralParams {
            n,
            m: n.min((2 * c + 2).max(log_sq)),
            c,
        }
    }

    /// `L u^k = n^(2k) / (n)_k^2` up to `m`, else 0.
    pub fn u_power(&self, k: usize) -> BigRational {
        if k > self.m {
            return BigRational::zero();
        }
        let fall = falling(self.n, k);
        BigRational::new(num_traits::pow(BigInt::from(self.n), 2 * k), &fall * &fall)
    }

    /// `L z^k = n^-k` up to `C`, else 0.
    pub fn z_power(&self, k: usize) -> BigRational {
        if k > self.c {
            return BigRational::zero();
        }
        pow_i(self.n, -(k as i64))
    }
}

pub fn l_apply(s: &BivariateSeries, p: &UmbralParams) -> Result<BigRational> {
    if p.m > p.n {
        return Err(Error::BadParams(format!(
            "u cutoff {} exceeds group order {}",
            p.m, p.n
        )));
    }
    let mut total = BigRational::zero();
    for (i, j, c) in s.terms() {
        if i <= p.m && j <= p.c {
            total += c * p.u_power(i) * p.z_power(j);
        }
    }
    Ok(total)
}

type ClassKey = (usize, usize);

fn class_cache() -> &'static Mutex<HashMap<ClassKey, Arc<Vec<ConnectedClass>>>> {
    static CACHE: OnceLock<Mutex<HashMap<ClassKey, Arc<Vec<ConnectedClass>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Connected classes with `cx <= max_cx` and support `<= max_supp`,
/// enumerated once per process.
pub fn connected_classes(max_cx: usize, max_supp: usize) -> Result<Arc<Vec<ConnectedClass>>> {
    let key = (max_cx, max_supp.min(4 * max_cx + 2));
    if let Some(v) = class_cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let classes = Arc::new(enumerate_connected(key.0, Some(key.1))?);
    class_cache().lock().unwrap().insert(key, classes.clone());
    Ok(classes)
}

/// One term of the connected series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    pub class: ConnectedClass,
    pub gamma: BigRational,
    /// `mu / |Aut| * gamma`.
    pub weight: BigRational,
}

/// `gamma_G` with the identity target for every connected class with
/// `cx <= c` and support `<= u_cap`.
pub fn series_terms(g: &FiniteGroup, c: usize, u_cap: usize) -> Result<Vec<SeriesTerm>> {
    if c > DEFAULT_MAX_CX {
        return Err(Error::LimitExceeded {
            what: "expansion order",
            value: c as u64,
            limit: DEFAULT_MAX_CX as u64,
        });
    }
    let classes = connected_classes(c, u_cap)?;
    let engine = GammaEngine::new(g);
    let one = TargetFunction::identity(g);
    let eval = |cl: &ConnectedClass| -> Result<SeriesTerm> {
        let gamma = engine.gamma(&cl.system, &one, &crate::gamma::natural_embedding)?;
        let weight =
            BigRational::new(BigInt::from(cl.mobius), BigInt::from(cl.automorphisms)) * &gamma;
        Ok(SeriesTerm {
            class: cl.clone(),
            gamma,
            weight,
        })
    };
    #[cfg(feature = "parallel")]
    let terms: Vec<Result<SeriesTerm>> = {
        use rayon::prelude::*;
        classes.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let terms: Vec<Result<SeriesTerm>> = classes.iter().map(eval).collect();
    terms.into_iter().collect()
}

/// `f_G(u, z)` truncated at `u^u_cap` and `z^c`.
pub fn f_g_series(g: &FiniteGroup, c: usize, u_cap: usize) -> Result<BivariateSeries> {
    let mut s = BivariateSeries::zero(u_cap, c);
    for t in series_terms(g, c, u_cap)? {
        s.add_term(t.class.support_size, t.class.complexity, t.weight);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub params: UmbralParams,
    /// `L exp(f_G)`, the predicted `cm / (|G^ab| n!^2 / n^n)`.
    pub ratio: BigRational,
    /// `|G^ab| n!^2 / n^n`.
    pub scale: BigRational,
    /// `scale * ratio`.
    pub count: BigRational,
}

impl Prediction {
    pub fn ratio_f64(&self) -> f64 {
        to_f64(&self.ratio)
    }

    pub fn count_f64(&self) -> f64 {
        to_f64(&self.count)
    }

    pub fn scale_f64(&self) -> f64 {
        to_f64(&self.scale)
    }
}

/// `|G^ab| n!^2 / n^n`.
pub fn count_scale(g: &FiniteGroup) -> BigRational {
    let n = g.order();
    let ab = g.invariants().abelianization_order;
    let nf = BigInt::from(factorial(n));
    BigRational::new(
        BigInt::from(ab) * &nf * &nf,
        num_traits::pow(BigInt::from(n), n),
    )
}

pub fn predict(g: &FiniteGroup, c: usize) -> Result<Prediction> {
    predict_with(g, UmbralParams::standard(g.order(), c))
}

pub fn predict_with(g: &FiniteGroup, params: UmbralParams) -> Result<Prediction> {
    let params = UmbralParams::new(params.n, params.m, params.c)?;
    let series = f_g_series(g, params.c, params.m)?;
    let ratio = l_apply(&series.exp()?, &params)?;
    let scale = count_scale(g);
    Ok(Prediction {
        params,
        count: &scale * &ratio,
        ratio,
        scale,
    })
}

/// `e^(-1/2) (1 + (1/3 + inv(G)/4) / n)`.
pub fn closed_first_order(g: &FiniteGroup) -> f64 {
    let n = g.order() as f64;
    let inv = g.invariants().inv_fraction_f64();
    (-0.5f64).exp() * (1.0 + (1.0 / 3.0 + inv / 4.0) / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularPrediction {
    /// `S(f) |G^ab| n!^3 / n^n`.
    pub value: f64,
    pub singular_series: f64,
    /// Whether the product of the values of `f` lies in the commutator
    /// subgroup; when it does not, the exact count is 0.
    pub condition_holds: bool,
}

pub fn singular_series_prediction(
    g: &FiniteGroup,
    f: &TargetFunction,
    m: usize,
) -> Result<SingularPrediction> {
    let stats = collision_stats(f, m);
    let n = g.order();
    let nf = BigInt::from(factorial(n));
    let base = BigRational::new(
        BigInt::from(g.invariants().abelianization_order) * &nf * &nf * &nf,
        num_traits::pow(BigInt::from(n), n),
    );
    Ok(SingularPrediction {
        value: stats.singular_series * to_f64(&base),
        singular_series: stats.singular_series,
        condition_holds: f.satisfies_product_condition(g)?,
    })
}
