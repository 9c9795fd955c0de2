//! Named verification suites over a built-in corpus of small groups.
//!
//! Every check records what was tested, with which parameters, and the
//! values involved, so a failure can be reproduced from the report alone.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::counting::{count_complete_mappings, count_triple_solutions_search, TargetFunction};
use crate::enumerate::enumerate_connected;
use crate::error::{Error, Result};
use crate::gamma::{
    abs_at_most, gamma_deviation_bound, gamma_magnitude_bound, natural_embedding, GammaEngine,
};
use crate::group::{FiniteGroup, GroupSpec};
use crate::physical::{
    m_route_partitions, m_route_physical_by_size, mobius_inversion_check, sparseval_all,
    DEFAULT_CUBE_LIMIT,
};
use crate::poly::{alpha_poly, LaurentPoly};
use crate::rational::{bijection_density, factorial, ratio, to_f64};
use crate::report::rational_string;
use crate::system::{canonical_form, PartitionSystem, REORDERINGS};

/// A corpus member; `exact` marks groups small enough for exhaustive counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub spec: &'static str,
    pub exact: bool,
}

const fn entry(spec: &'static str) -> CorpusEntry {
    CorpusEntry { spec, exact: true }
}

pub const CORPUS: &[CorpusEntry] = &[
    entry("cyclic:1"),
    entry("cyclic:2"),
    entry("cyclic:3"),
    entry("cyclic:4"),
    entry("cyclic:5"),
    entry("cyclic:6"),
    entry("cyclic:7"),
    entry("cyclic:8"),
    entry("cyclic:9"),
    entry("cyclic:10"),
    entry("cyclic:11"),
    entry("cyclic:12"),
    entry("cyclic:13"),
    entry("elementary_abelian:2,2"),
    entry("elementary_abelian:2,3"),
    entry("dihedral:6"),
    entry("dihedral:8"),
    entry("dihedral:10"),
    entry("dihedral:12"),
    entry("quaternion"),
    entry("symmetric:3"),
    entry("alternating:4"),
    entry("cyclic:3*cyclic:3"),
    CorpusEntry {
        spec: "symmetric:4",
        exact: false,
    },
];

impl CorpusEntry {
    pub fn build(&self) -> FiniteGroup {
        self.spec
            .parse::<GroupSpec>()
            .and_then(|s| s.build())
            .expect("corpus specs are valid")
    }
}

pub fn corpus_groups() -> Vec<(CorpusEntry, FiniteGroup)> {
    CORPUS.iter().map(|e| (*e, e.build())).collect()
}

/// `alpha_m(t)` for `m = 1..=7` as `(coefficient, exponent)` lists.
pub const ALPHA_TABLE: [&[(i64, i64)]; 7] = [
    &[],
    &[(1, 1)],
    &[(2, 2)],
    &[(3, 2), (6, 3)],
    &[(20, 3), (24, 4)],
    &[(15, 3), (130, 4), (120, 5)],
    &[(210, 4), (924, 5), (720, 6)],
];

/// The connected systems of support at most 5, one per class up to
/// isomorphism and reordering, with their complexity.
pub const CONNECTED_TABLE: [(&str, i64); 19] = [
    ("2; {1,2}; {1,2}; {1,2}", 0),
    ("3; {1,2,3}; {1,2,3}; {1,2,3}", 1),
    ("4; {1,2},{3,4}; {1,3},{2,4}; {1,4},{2,3}", 1),
    ("4; {1,2},{3,4}; {1,2},{3,4}; {1,3},{2,4}", 1),
    ("4; {1,2,3,4}; {1,2},{3,4}; {1,2},{3,4}", 1),
    ("4; {1,2,3,4}; {1,2},{3,4}; {1,3},{2,4}", 2),
    ("4; {1,2,3,4}; {1,2,3,4}; {1,2},{3,4}", 2),
    ("4; {1,2,3,4}; {1,2,3,4}; {1,2,3,4}", 2),
    ("5; {1,2,3},{4,5}; {1,2,4},{3,5}; {1,3,4},{2,5}", 2),
    ("5; {1,2,3},{4,5}; {1,2,4},{3,5}; {1,3,5},{2,4}", 2),
    ("5; {1,2,3},{4,5}; {1,2,4},{3,5}; {1,2,5},{3,4}", 2),
    ("5; {1,2,3},{4,5}; {1,2,3},{4,5}; {1,2,4},{3,5}", 2),
    ("5; {1,2,3},{4,5}; {1,2,4},{3,5}; {1,2},{3,4,5}", 2),
    ("5; {1,2,3},{4,5}; {1,2,3},{4,5}; {1,2},{3,4,5}", 2),
    ("5; {1,2,3,4,5}; {1,2,3},{4,5}; {1,2,3},{4,5}", 2),
    ("5; {1,2,3,4,5}; {1,2,3},{4,5}; {1,2,4},{3,5}", 3),
    ("5; {1,2,3,4,5}; {1,2,3},{4,5}; {1,2},{3,4,5}", 3),
    ("5; {1,2,3,4,5}; {1,2,3,4,5}; {1,2,3},{4,5}", 3),
    ("5; {1,2,3,4,5}; {1,2,3,4,5}; {1,2,3,4,5}", 3),
];

/// `(mobius, |Aut|, reorderings)` for the first five rows of
/// [`CONNECTED_TABLE`], the systems of complexity at most 1.
pub const LOW_COMPLEXITY_DATA: [(i128, u64, usize); 5] =
    [(-1, 2, 1), (8, 6, 1), (1, 4, 1), (1, 4, 3), (-6, 8, 3)];

pub const PAIRING: &str = "2; {1,2}; {1,2}; {1,2}";
pub const KLEIN_PAIRING: &str = "4; {1,2},{3,4}; {1,3},{2,4}; {1,4},{2,3}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Tables,
    Mobius,
    Gamma,
    Routes,
    Sparseval,
    Parseval,
    HpEquivalence,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Tables,
        Suite::Mobius,
        Suite::Gamma,
        Suite::Routes,
        Suite::Sparseval,
        Suite::Parseval,
        Suite::HpEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tables => "tables",
            Suite::Mobius => "mobius",
            Suite::Gamma => "gamma",
            Suite::Routes => "routes",
            Suite::Sparseval => "sparseval",
            Suite::Parseval => "parseval",
            Suite::HpEquivalence => "hp-equivalence",
        }
    }

    /// Parses a suite name, with `all` expanding to every suite.
    pub fn parse_selection(text: &str) -> Result<Vec<Suite>> {
        if text.trim() == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        text.split(',').map(str::parse).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::BadParameter(format!("unknown suite `{s}`")))
    }
}

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub suite: Suite,
    pub name: String,
    pub params: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest group order used by the exhaustive physical-side checks.
    pub max_n: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { max_n: 5 }
    }
}

struct Recorder {
    suite: Suite,
    out: Vec<IdentityCheck>,
}

impl Recorder {
    fn new(suite: Suite) -> Self {
        Recorder {
            suite,
            out: Vec::new(),
        }
    }

    /// Records the result of `body`; an error counts as a failure.
    fn check(
        &mut self,
        name: &str,
        params: impl Into<String>,
        body: impl FnOnce() -> Result<(bool, String)>,
    ) {
        let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.out.push(IdentityCheck {
            suite: self.suite,
            name: name.to_string(),
            params: params.into(),
            passed,
            detail,
        });
    }
}

pub fn run_suite(suite: Suite, opts: VerifyOptions) -> Vec<IdentityCheck> {
    let mut rec = Recorder::new(suite);
    match suite {
        Suite::Tables => tables(&mut rec),
        Suite::Mobius => mobius(&mut rec, opts),
        Suite::Gamma => gamma_suite(&mut rec, opts),
        Suite::Routes => routes(&mut rec, opts),
        Suite::Sparseval => sparseval(&mut rec, opts),
        Suite::Parseval => parseval(&mut rec, opts),
        Suite::HpEquivalence => hp_equivalence(&mut rec),
    }
    rec.out
}

pub fn run_suites(suites: &[Suite], opts: VerifyOptions) -> Vec<IdentityCheck> {
    suites.iter().flat_map(|&s| run_suite(s, opts)).collect()
}

fn poly_from(terms: &[(i64, i64)]) -> LaurentPoly {
    terms.iter().fold(LaurentPoly::zero(), |acc, &(c, e)| {
        acc.add(&LaurentPoly::monomial(c, e))
    })
}

/// Least canonical code over the six reorderings.
pub fn reorder_class_of(s: &PartitionSystem) -> Result<Vec<u8>> {
    let mut best: Option<Vec<u8>> = None;
    for r in REORDERINGS {
        let code = canonical_form(&s.reorder(r))?.code;
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    }
    Ok(best.expect("six reorderings"))
}

fn tables(rec: &mut Recorder) {
    for (i, terms) in ALPHA_TABLE.iter().enumerate() {
        let m = i + 1;
        rec.check("alpha-polynomial", format!("m={m}"), || {
            let got = alpha_poly(m);
            Ok((got == poly_from(terms), format!("alpha_{m} = {got}")))
        });
    }

    let classes = match enumerate_connected(3, Some(5)) {
        Ok(c) => c,
        Err(e) => {
            rec.check("connected-classes", "cx<=3, supp<=5", || Err(e));
            return;
        }
    };
    let mut by_class: BTreeMap<Vec<u8>, i64> = BTreeMap::new();
    for c in &classes {
        by_class.insert(c.reorder_class.clone(), c.complexity as i64);
    }
    rec.check("connected-class-count", "cx<=3, supp<=5", || {
        Ok((
            by_class.len() == CONNECTED_TABLE.len(),
            format!("{} classes up to reordering", by_class.len()),
        ))
    });

    let mut seen = BTreeSet::new();
    for (i, (text, cx)) in CONNECTED_TABLE.iter().enumerate() {
        rec.check("connected-class", format!("row={i}"), || {
            let s = PartitionSystem::parse(text)?;
            let key = reorder_class_of(&s)?;
            let fresh = seen.insert(key.clone());
            let found = by_class.get(&key).copied();
            Ok((
                fresh && found == Some(*cx) && s.complexity() == *cx && s.is_connected(),
                format!("listed cx {cx}, enumerated {found:?}, distinct {fresh}"),
            ))
        });
    }

    for (i, &(mu, aut, reord)) in LOW_COMPLEXITY_DATA.iter().enumerate() {
        rec.check("low-complexity-data", format!("row={i}"), || {
            let s = PartitionSystem::parse(CONNECTED_TABLE[i].0)?;
            let code = canonical_form(&s)?.code;
            let class = classes
                .iter()
                .find(|c| c.code == code)
                .ok_or_else(|| Error::BadParameter("class not enumerated".into()))?;
            let got = (class.mobius, class.automorphisms, class.reorderings);
            Ok((
                got == (mu, aut, reord),
                format!("(mu, |Aut|, reorderings) = {got:?}"),
            ))
        });
    }
}

fn small_groups(max_n: usize) -> Vec<(CorpusEntry, FiniteGroup)> {
    corpus_groups()
        .into_iter()
        .filter(|(_, g)| g.order() <= max_n)
        .collect()
}

fn mobius(rec: &mut Recorder, opts: VerifyOptions) {
    for (_, g) in small_groups(opts.max_n.min(5)) {
        for k in 1..=5 {
            rec.check(
                "mobius-inversion",
                format!("group={} k={k}", g.name()),
                || {
                    let checked = mobius_inversion_check(&g, k)?;
                    Ok((true, format!("{checked} functions")))
                },
            );
        }
    }
}

/// Groups of gamma checks that can be run separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaCheck {
    /// The pairing and Klein pairing values.
    Identities,
    /// Range and deviation bounds over every class of complexity <= 2.
    Bounds,
    /// Invariance under the six reorderings, complexity <= 2.
    Reordering,
    /// Disjoint unions of complexity <= 1 classes.
    Multiplicative,
}

impl GammaCheck {
    pub const ALL: [GammaCheck; 4] = [
        GammaCheck::Identities,
        GammaCheck::Bounds,
        GammaCheck::Reordering,
        GammaCheck::Multiplicative,
    ];
}

/// The selected gamma checks for one group.
pub fn gamma_checks_for(g: &FiniteGroup, which: &[GammaCheck]) -> Vec<IdentityCheck> {
    let mut rec = Recorder::new(Suite::Gamma);
    gamma_group(&mut rec, g, which);
    rec.out
}

fn gamma_group(rec: &mut Recorder, g: &FiniteGroup, which: &[GammaCheck]) {
    let n = g.order();
    let engine = GammaEngine::new(g);
    let one = TargetFunction::identity(g);
    let name = g.name().to_string();
    if which.contains(&GammaCheck::Identities) {
        rec.check("pairing-gamma", format!("group={name}"), || {
            let v = engine.gamma(&PartitionSystem::parse(PAIRING)?, &one, &natural_embedding)?;
            let want = BigRational::one() - ratio(1, n as i64);
            Ok((v == want, format!("gamma = {}", rational_string(&v))))
        });
        rec.check("klein-gamma0", format!("group={name}"), || {
            let v = engine.gamma0(
                &PartitionSystem::parse(KLEIN_PAIRING)?,
                &one,
                &natural_embedding,
            )?;
            let inv = g.invariants().involution_fraction;
            let want = ratio(*inv.numer() as i64, *inv.denom() as i64);
            Ok((v == want, format!("gamma0 = {}", rational_string(&v))))
        });
    }
    if which.iter().all(|&w| w == GammaCheck::Identities) {
        return;
    }

    let classes = match enumerate_connected(2, None) {
        Ok(c) => c,
        Err(e) => {
            rec.check("gamma-bounds", format!("group={name}"), || Err(e));
            return;
        }
    };
    let wants = |w| which.contains(&w);
    if wants(GammaCheck::Bounds) {
        rec.check("gamma-bounds", format!("group={name} cx<=2"), || {
            let mut worst = String::new();
            for c in &classes {
                let v = engine.evaluate(&c.system)?;
                let m = c.support_size;
                let in_unit = !v.gamma0.is_negative() && v.gamma0 <= BigRational::one();
                let dev = (&v.gamma - &v.gamma0).abs() <= gamma_deviation_bound(n, m);
                let mag = abs_at_most(&v.gamma, gamma_magnitude_bound(n, m));
                if !(in_unit && dev && mag) {
                    worst = format!(
                        "{}: gamma0 {} gamma {}",
                        c.system,
                        rational_string(&v.gamma0),
                        rational_string(&v.gamma)
                    );
                    break;
                }
            }
            Ok((
                worst.is_empty(),
                if worst.is_empty() {
                    format!("{} classes", classes.len())
                } else {
                    worst
                },
            ))
        });
    }
    if wants(GammaCheck::Reordering) {
        rec.check("gamma-reordering", format!("group={name} cx<=2"), || {
            for c in &classes {
                let base = engine.gamma(&c.system, &one, &natural_embedding)?;
                for r in REORDERINGS {
                    let v = engine.gamma(&c.system.reorder(r), &one, &natural_embedding)?;
                    if v != base {
                        return Ok((false, format!("{} reordered by {r:?}", c.system)));
                    }
                }
            }
            Ok((true, format!("{} classes x 6", classes.len())))
        });
    }
    if !wants(GammaCheck::Multiplicative) {
        return;
    }
    rec.check(
        "gamma-multiplicative",
        format!("group={name} cx<=1 pairs"),
        || {
            let low: Vec<_> = classes.iter().filter(|c| c.complexity <= 1).collect();
            let mut pairs = 0;
            for (i, a) in low.iter().enumerate() {
                for b in &low[i..] {
                    let u = a.system.disjoint_union(&b.system);
                    let va = engine.evaluate(&a.system)?;
                    let vb = engine.evaluate(&b.system)?;
                    let vu = engine.evaluate(&u)?;
                    if vu.gamma0 != &va.gamma0 * &vb.gamma0 || vu.gamma != &va.gamma * &vb.gamma {
                        return Ok((false, format!("{} with {}", a.system, b.system)));
                    }
                    pairs += 1;
                }
            }
            Ok((true, format!("{pairs} pairs")))
        },
    );
}

fn gamma_suite(rec: &mut Recorder, opts: VerifyOptions) {
    for (_, g) in corpus_groups() {
        let which: &[GammaCheck] = if g.order() <= opts.max_n.max(5) {
            &GammaCheck::ALL
        } else {
            &GammaCheck::ALL[..3]
        };
        gamma_group(rec, &g, which);
    }
}

/// Deterministic non-constant target functions used by the route and
/// full-sum checks: a single nontrivial value, and a spread of values.
pub fn sample_targets(g: &FiniteGroup) -> Vec<TargetFunction> {
    let n = g.order();
    if n < 2 {
        return Vec::new();
    }
    let mut single = vec![0; n];
    single[0] = 1;
    let spread: Vec<usize> = (0..n).map(|i| (i * i + 1) % n).collect();
    [single, spread]
        .into_iter()
        .map(|v| TargetFunction::new(g, v).expect("values in range"))
        .collect()
}

fn values_text(f: &TargetFunction) -> String {
    f.to_text().trim().replace(' ', ",")
}

/// Compares the two routes to the truncated sums for every `m <= n`.
pub fn route_check(g: &FiniteGroup, f: &TargetFunction) -> Result<(bool, String)> {
    let n = g.order();
    let by_size = m_route_physical_by_size(g, f)?;
    let z = ratio(1, n as i64);
    let mut acc = BigRational::zero();
    for (m, term) in by_size.iter().enumerate() {
        acc += term;
        let part = m_route_partitions(g, f, m, &z)?;
        if part != acc {
            return Ok((
                false,
                format!(
                    "m={m}: physical {} partitions {}",
                    rational_string(&acc),
                    rational_string(&part)
                ),
            ));
        }
    }
    Ok((true, format!("m=0..{n}, total {}", rational_string(&acc))))
}

fn routes(rec: &mut Recorder, opts: VerifyOptions) {
    for (_, g) in small_groups(opts.max_n.min(DEFAULT_CUBE_LIMIT)) {
        if g.order() < 2 {
            continue;
        }
        let one = TargetFunction::identity(&g);
        rec.check("route-equality", format!("group={} f=1", g.name()), || {
            route_check(&g, &one)
        });
        if g.order() <= 4 {
            for f in sample_targets(&g) {
                rec.check(
                    "route-equality",
                    format!("group={} f={}", g.name(), values_text(&f)),
                    || route_check(&g, &f),
                );
            }
        }
    }
}

fn sparseval(rec: &mut Recorder, opts: VerifyOptions) {
    for (_, g) in small_groups(opts.max_n.min(5)) {
        rec.check("sparseval-bound", format!("group={}", g.name()), || {
            let all = sparseval_all(&g)?;
            let bad: Vec<usize> = all.iter().filter(|c| !c.holds).map(|c| c.m).collect();
            let detail = all
                .iter()
                .map(|c| format!("m={} lhs={:.6e} rhs={:.6e}", c.m, to_f64(&c.lhs), c.rhs))
                .collect::<Vec<_>>()
                .join("; ");
            Ok((bad.is_empty(), detail))
        });
    }
}

/// `sum_X (P_X 1_S)^{*3}(f)` against the exhaustive triple count.
pub fn full_sum_check(g: &FiniteGroup, f: &TargetFunction) -> Result<(bool, String)> {
    let n = g.order();
    let total: BigRational = m_route_physical_by_size(g, f)?.into_iter().sum();
    let count = count_triple_solutions_search(g, f, DEFAULT_CUBE_LIMIT)?;
    let want = BigRational::new(
        BigInt::from(count.clone()),
        num_traits::pow(BigInt::from(n), 2 * n),
    );
    Ok((
        total == want,
        format!("sum {} count {count}", rational_string(&total)),
    ))
}

fn parseval(rec: &mut Recorder, opts: VerifyOptions) {
    for (_, g) in small_groups(opts.max_n.min(5)) {
        rec.check("parseval", format!("group={}", g.name()), || {
            let total: BigRational = sparseval_all(&g)?.into_iter().map(|c| c.lhs).sum();
            let want = bijection_density(g.order());
            Ok((total == want, format!("sum {}", rational_string(&total))))
        });
        let mut targets = vec![TargetFunction::identity(&g)];
        targets.extend(sample_targets(&g));
        for f in targets {
            rec.check(
                "full-sum",
                format!("group={} f={}", g.name(), values_text(&f)),
                || full_sum_check(&g, &f),
            );
        }
    }
    for (_, g) in small_groups(opts.max_n.clamp(5, 6)) {
        rec.check("triple-oracle", format!("group={}", g.name()), || {
            let one = TargetFunction::identity(&g);
            let triples = count_triple_solutions_search(&g, &one, DEFAULT_CUBE_LIMIT)?;
            let cm = count_complete_mappings(&g)?;
            Ok((
                triples == &cm * factorial(g.order()),
                format!("triples {triples}, cm {cm}"),
            ))
        });
    }
}

fn hp_equivalence(rec: &mut Recorder) {
    for (e, g) in corpus_groups() {
        let inv = g.invariants();
        rec.check("hall-paige-criteria", format!("group={}", g.name()), || {
            Ok((
                inv.product_condition == inv.sylow_condition,
                format!(
                    "product {} sylow {}",
                    inv.product_condition, inv.sylow_condition
                ),
            ))
        });
        if e.exact {
            rec.check("hall-paige-count", format!("group={}", g.name()), || {
                let cm = count_complete_mappings(&g)?;
                Ok((
                    cm.is_zero() != inv.hall_paige(),
                    format!("cm {cm}, condition {}", inv.hall_paige()),
                ))
            });
        }
    }
}
