//! Text, JSON and CSV renderings of the command reports.

use std::fmt::Write as _;

use hplab::report::{float15, rational_string, PredictionReport};
use hplab::verify::IdentityCheck;
use hplab::{FiniteGroup, GroupInvariants};
use num_bigint::BigUint;
use serde::Serialize;

use crate::{Failure, Format};

#[derive(Debug, Serialize)]
pub struct InfoReport {
    pub group: String,
    pub n: usize,
    #[serde(flatten)]
    pub invariants: GroupInvariants,
    pub hall_paige: bool,
}

impl InfoReport {
    pub fn new(g: &FiniteGroup) -> Self {
        let invariants = g.invariants();
        InfoReport {
            group: g.name().to_string(),
            n: g.order(),
            hall_paige: invariants.hall_paige(),
            invariants,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TripleReport {
    pub target: String,
    pub count: String,
    pub singular_series: f64,
    pub prediction: f64,
    pub product_condition: bool,
}

#[derive(Debug, Serialize)]
pub struct CountReport {
    pub group: String,
    pub n: usize,
    pub complete_mappings: String,
    pub millis: f64,
    pub triple: Option<TripleReport>,
}

#[derive(Debug, Serialize)]
pub struct CorpusRow {
    #[serde(flatten)]
    pub report: PredictionReport,
    /// Largest exact count among corpus groups of the same order.
    pub max_in_order: Option<bool>,
}

impl CorpusRow {
    pub fn new(report: PredictionReport) -> Self {
        CorpusRow {
            report,
            max_in_order: None,
        }
    }
}

/// Flags the rows whose exact count is the largest among rows of equal
/// order; rows without an exact count stay unflagged.
pub fn mark_maxima(rows: &mut [CorpusRow]) {
    let count = |r: &CorpusRow| {
        r.report
            .exact_count
            .as_ref()
            .and_then(|c| c.parse::<BigUint>().ok())
    };
    let counts: Vec<_> = rows.iter().map(count).collect();
    for i in 0..rows.len() {
        let Some(mine) = &counts[i] else { continue };
        let n = rows[i].report.n;
        let best = (0..rows.len())
            .filter(|&j| rows[j].report.n == n)
            .filter_map(|j| counts[j].as_ref())
            .max()
            .expect("row i itself");
        rows[i].max_in_order = Some(mine == best);
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn csv_table(header: &[String], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Usage(e.to_string()))
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float15).unwrap_or_default()
}

pub fn info(r: &InfoReport, fmt: Format) -> Result<String, Failure> {
    let inv = &r.invariants;
    let fraction = format!(
        "{}/{}",
        inv.involution_fraction.numer(),
        inv.involution_fraction.denom()
    );
    match fmt {
        Format::Json => json(r),
        Format::Csv => csv_table(
            &strings(&[
                "group",
                "n",
                "abelianization_order",
                "commutator_order",
                "involution_count",
                "inv",
                "product_condition",
                "sylow_condition",
                "sylow2_order",
                "hall_paige",
            ]),
            &[vec![
                r.group.clone(),
                r.n.to_string(),
                inv.abelianization_order.to_string(),
                inv.commutator_subgroup.len().to_string(),
                inv.involution_count.to_string(),
                fraction,
                inv.product_condition.to_string(),
                inv.sylow_condition.to_string(),
                inv.sylow2_order.to_string(),
                r.hall_paige.to_string(),
            ]],
        ),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "group              {}", r.group).unwrap();
            writeln!(s, "order              {}", r.n).unwrap();
            writeln!(s, "|G^ab|             {}", inv.abelianization_order).unwrap();
            writeln!(s, "|G'|               {}", inv.commutator_subgroup.len()).unwrap();
            writeln!(
                s,
                "involutions        {} (inv = {fraction})",
                inv.involution_count
            )
            .unwrap();
            writeln!(s, "product criterion  {}", inv.product_condition).unwrap();
            writeln!(
                s,
                "sylow criterion    {} (Sylow 2-subgroup order {})",
                inv.sylow_condition, inv.sylow2_order
            )
            .unwrap();
            writeln!(s, "hall_paige={}", r.hall_paige).unwrap();
            Ok(s)
        }
    }
}

pub fn count(r: &CountReport, fmt: Format) -> Result<String, Failure> {
    match fmt {
        Format::Json => json(r),
        Format::Csv => {
            let mut header = strings(&["group", "n", "complete_mappings", "millis"]);
            let mut row = vec![
                r.group.clone(),
                r.n.to_string(),
                r.complete_mappings.clone(),
                format!("{:.3}", r.millis),
            ];
            if let Some(t) = &r.triple {
                header.extend(strings(&[
                    "target",
                    "triple_count",
                    "singular_series",
                    "prediction",
                    "product_condition",
                ]));
                row.extend([
                    t.target.clone(),
                    t.count.clone(),
                    float15(t.singular_series),
                    float15(t.prediction),
                    t.product_condition.to_string(),
                ]);
            }
            csv_table(&header, &[row])
        }
        Format::Text => {
            let mut s = format!(
                "{} (n = {}): {} complete mappings [{:.1} ms]\n",
                r.group, r.n, r.complete_mappings, r.millis
            );
            if let Some(t) = &r.triple {
                writeln!(s, "target f           {}", t.target).unwrap();
                writeln!(s, "triple solutions   {}", t.count).unwrap();
                writeln!(
                    s,
                    "leading prediction {} (singular series {:.6}, product condition {})",
                    float15(t.prediction),
                    t.singular_series,
                    t.product_condition
                )
                .unwrap();
            }
            Ok(s)
        }
    }
}

fn prediction_text(r: &PredictionReport, s: &mut String) {
    writeln!(
        s,
        "{} (n = {}), |G^ab| = {}, inv = {}/{}, hall_paige product={} sylow={}",
        r.group,
        r.n,
        r.abelianization_order,
        r.involution_fraction.numer(),
        r.involution_fraction.denom(),
        r.hall_paige_product,
        r.hall_paige_sylow
    )
    .unwrap();
    match (&r.exact_count, &r.exact_ratio) {
        (Some(c), Some(q)) => writeln!(
            s,
            "  exact count {c}, ratio {:.6}",
            hplab::rational::to_f64(q)
        )
        .unwrap(),
        _ => writeln!(s, "  exact count not computed").unwrap(),
    }
    writeln!(s, "  closed first-order ratio {:.6}", r.closed_first_order).unwrap();
    writeln!(
        s,
        "  {:>5} {:>3} {:>12} {:>22} {:>12}",
        "order", "m", "ratio", "predicted count", "residual"
    )
    .unwrap();
    for st in &r.stages {
        writeln!(
            s,
            "  {:>5} {:>3} {:>12.6} {:>22} {:>12}",
            st.order,
            st.m,
            st.ratio_float,
            float15(st.count_float),
            st.residual.map(|x| format!("{x:.4}")).unwrap_or("-".into())
        )
        .unwrap();
    }
}

pub fn prediction(r: &PredictionReport, fmt: Format) -> Result<String, Failure> {
    match fmt {
        Format::Json => json(r),
        Format::Csv => corpus(
            &[CorpusRow::new(r.clone())],
            r.stages.len().saturating_sub(1),
            fmt,
        ),
        Format::Text => {
            let mut s = String::new();
            prediction_text(r, &mut s);
            Ok(s)
        }
    }
}

/// Column layout of the corpus CSV: fixed group columns, then ratio,
/// predicted count and residual for each order.
pub fn corpus_header(order: usize) -> Vec<String> {
    let mut h = strings(&[
        "group",
        "n",
        "abelianization_order",
        "inv",
        "hall_paige",
        "exact_count",
        "exact_ratio",
        "max_in_order",
        "closed_first_order",
    ]);
    for c in 0..=order {
        h.push(format!("ratio_c{c}"));
        h.push(format!("count_c{c}"));
        h.push(format!("residual_c{c}"));
    }
    h
}

pub fn corpus(rows: &[CorpusRow], order: usize, fmt: Format) -> Result<String, Failure> {
    match fmt {
        Format::Json => json(rows),
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|row| {
                    let r = &row.report;
                    let mut v = vec![
                        r.group.clone(),
                        r.n.to_string(),
                        r.abelianization_order.to_string(),
                        format!(
                            "{}/{}",
                            r.involution_fraction.numer(),
                            r.involution_fraction.denom()
                        ),
                        r.hall_paige_product.to_string(),
                        r.exact_count.clone().unwrap_or_default(),
                        r.exact_ratio
                            .as_ref()
                            .map(rational_string)
                            .unwrap_or_default(),
                        row.max_in_order.map(|b| b.to_string()).unwrap_or_default(),
                        float15(r.closed_first_order),
                    ];
                    for st in &r.stages {
                        v.push(float15(st.ratio_float));
                        v.push(float15(st.count_float));
                        v.push(opt_float(st.residual));
                    }
                    v
                })
                .collect();
            csv_table(&corpus_header(order), &body)
        }
        Format::Text => {
            let mut s = String::new();
            for row in rows {
                prediction_text(&row.report, &mut s);
                if row.max_in_order == Some(true) {
                    writeln!(
                        s,
                        "  largest exact count among corpus groups of order {}",
                        row.report.n
                    )
                    .unwrap();
                }
                s.push('\n');
            }
            Ok(s)
        }
    }
}

pub fn checks(checks: &[IdentityCheck], fmt: Format) -> Result<String, Failure> {
    match fmt {
        Format::Json => json(checks),
        Format::Csv => csv_table(
            &strings(&["suite", "name", "params", "passed", "detail"]),
            &checks
                .iter()
                .map(|c| {
                    vec![
                        c.suite.to_string(),
                        c.name.clone(),
                        c.params.clone(),
                        c.passed.to_string(),
                        c.detail.clone(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Text => {
            let mut s = String::new();
            for c in checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                writeln!(
                    s,
                    "{verdict} {} {} [{}]: {}",
                    c.suite, c.name, c.params, c.detail
                )
                .unwrap();
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            writeln!(s, "{} checks, {failed} failed", checks.len()).unwrap();
            Ok(s)
        }
    }
}
