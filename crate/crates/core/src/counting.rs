//! Exhaustive counting oracles: complete mappings, solutions of
//! `pi1 * pi2 * pi3 = f` in bijections, and collision statistics.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{next_permutation, FiniteGroup};
use crate::rational::{factorial, ratio};

pub const DEFAULT_CM_LIMIT: usize = 14;
pub const DEFAULT_TRIPLE_LIMIT: usize = 7;

/// A function `f: {1..n} -> G`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetFunction {
    group: u64,
    values: Vec<usize>,
}

impl TargetFunction {
    pub fn new(g: &FiniteGroup, values: Vec<usize>) -> Result<Self> {
        if values.len() != g.order() {
            return Err(Error::BadParameter(format!(
                "target function has {} values, group order is {}",
                values.len(),
                g.order()
            )));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= g.order()) {
            return Err(Error::BadParameter(format!(
                "target value {v} is not an element"
            )));
        }
        Ok(TargetFunction {
            group: g.fingerprint(),
            values,
        })
    }

    /// `f ≡ 1`.
    pub fn identity(g: &FiniteGroup) -> Self {
        TargetFunction {
            group: g.fingerprint(),
            values: vec![0; g.order()],
        }
    }

    /// Parses one line of whitespace-separated 0-based element indices.
    pub fn from_text(g: &FiniteGroup, text: &str) -> Result<Self> {
        let values = text
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad target value `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(g, values)
    }

    pub fn to_text(&self) -> String {
        let v: Vec<String> = self.values.iter().map(|x| x.to_string()).collect();
        v.join(" ") + "\n"
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn check_group(&self, g: &FiniteGroup) -> Result<()> {
        if self.group == g.fingerprint() && self.values.len() == g.order() {
            Ok(())
        } else {
            Err(Error::WrongGroup)
        }
    }

    /// Whether `prod f(i)` and `prod x` agree modulo the commutator subgroup,
    /// the necessary condition for any solution of `pi1 pi2 pi3 = f`.
    pub fn satisfies_product_condition(&self, g: &FiniteGroup) -> Result<bool> {
        self.check_group(g)?;
        let prod_f = self.values.iter().fold(0, |acc, &v| g.mul(acc, v));
        let q = g.mul(g.inv(g.product_of_all()), prod_f);
        Ok(g.commutator_subgroup().binary_search(&q).is_ok())
    }
}

fn check_search_size(g: &FiniteGroup, limit: usize) -> Result<()> {
    let n = g.order();
    if n > limit {
        return Err(Error::LimitExceeded {
            what: "group order",
            value: n as u64,
            limit: limit as u64,
        });
    }
    if n > 64 {
        return Err(Error::LimitExceeded {
            what: "group order (bitmask search)",
            value: n as u64,
            limit: 64,
        });
    }
    Ok(())
}

/// Counts completions of a partial complete mapping. `order[depth..]` are
/// the points still to assign; `used_val` and `used_prod` mark taken values
/// of `phi(x)` and of `x*phi(x)`.
fn extend_mapping(
    g: &FiniteGroup,
    order: &[usize],
    depth: usize,
    used_val: u64,
    used_prod: u64,
) -> u64 {
    let n = g.order();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let x = order[depth];
    let row = g.row(x);
    let mut free = !used_val & full;
    let last = depth + 1 == order.len();
    let mut total = 0;
    while free != 0 {
        let y = free.trailing_zeros() as usize;
        free &= free - 1;
        let p = row[y] as usize;
        if used_prod >> p & 1 != 0 {
            continue;
        }
        total += if last {
            1
        } else {
            extend_mapping(g, order, depth + 1, used_val | 1 << y, used_prod | 1 << p)
        };
    }
    total
}

/// Sum of subtree counts, one subtree per allowed value of `phi(first)`.
fn count_branches(g: &FiniteGroup, order: &[usize], used_val: u64, used_prod: u64) -> BigUint {
    if order.is_empty() {
        return BigUint::one();
    }
    let x = order[0];
    let branches: Vec<(u64, u64)> = (0..g.order())
        .filter(|&y| used_val >> y & 1 == 0 && used_prod >> g.mul(x, y) & 1 == 0)
        .map(|y| (used_val | 1 << y, used_prod | 1 << g.mul(x, y)))
        .collect();
    let sub = |&(v, p): &(u64, u64)| {
        if order.len() == 1 {
            1
        } else {
            extend_mapping(g, order, 1, v, p)
        }
    };
    #[cfg(feature = "parallel")]
    let counts: Vec<u64> = {
        use rayon::prelude::*;
        branches.par_iter().map(sub).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let counts: Vec<u64> = branches.iter().map(sub).collect();
    counts.into_iter().map(BigUint::from).sum()
}

/// Number of complete mappings, with the default order limit.
pub fn count_complete_mappings(g: &FiniteGroup) -> Result<BigUint> {
    count_complete_mappings_limited(g, DEFAULT_CM_LIMIT)
}

/// Number of bijections `phi` with `x -> x*phi(x)` also bijective.
///
/// Right translation `phi -> phi*a` acts freely on complete mappings and
/// moves `phi(0)` to any element, so the count is `n` times the number of
/// complete mappings with `phi(0) = 0`; the search counts only those.
pub fn count_complete_mappings_limited(g: &FiniteGroup, limit: usize) -> Result<BigUint> {
    check_search_size(g, limit)?;
    let n = g.order();
    // phi(0) = 0, so value 0 and product 0 are taken
    let order: Vec<usize> = (1..n).collect();
    Ok(count_branches(g, &order, 1, 1) * BigUint::from(n))
}

/// Unreduced search over all bijections, assigning `phi` along `order`
/// (a permutation of the elements). Slower; kept as a cross-check.
pub fn count_complete_mappings_in_order(
    g: &FiniteGroup,
    order: &[usize],
    limit: usize,
) -> Result<BigUint> {
    check_search_size(g, limit)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..g.order()).collect::<Vec<_>>() {
        return Err(Error::BadParameter(
            "search order must list every element once".into(),
        ));
    }
    Ok(count_branches(g, order, 0, 0))
}

/// Number of bijection triples with `pi1(x) pi2(x) pi3(x) = f(x)`.
///
/// For `f ≡ 1` this is `n! * cm(G)`; otherwise an exhaustive search whose
/// order limit defaults to [`DEFAULT_TRIPLE_LIMIT`].
pub fn count_triple_solutions(g: &FiniteGroup, f: &TargetFunction) -> Result<BigUint> {
    f.check_group(g)?;
    if f.is_identity() {
        let cm = count_complete_mappings(g)?;
        return Ok(cm * factorial(g.order()));
    }
    count_triple_solutions_search(g, f, DEFAULT_TRIPLE_LIMIT)
}

/// Exhaustive triple count for any `f`: every `pi1`, then a bitmask search
/// over `pi2` with `pi3(x) = (pi1(x) pi2(x))^-1 f(x)` kept injective.
pub fn count_triple_solutions_search(
    g: &FiniteGroup,
    f: &TargetFunction,
    limit: usize,
) -> Result<BigUint> {
    f.check_group(g)?;
    check_search_size(g, limit)?;
    let n = g.order();
    let mut pi1s = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        pi1s.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let count_for = |pi1: &Vec<usize>| -> u64 { extend_triple(g, f.values(), pi1, 0, 0, 0) };
    #[cfg(feature = "parallel")]
    let counts: Vec<u64> = {
        use rayon::prelude::*;
        pi1s.par_iter().map(count_for).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let counts: Vec<u64> = pi1s.iter().map(count_for).collect();
    Ok(counts.into_iter().map(BigUint::from).sum())
}

fn extend_triple(
    g: &FiniteGroup,
    f: &[usize],
    pi1: &[usize],
    x: usize,
    used2: u64,
    used3: u64,
) -> u64 {
    let n = g.order();
    if x == n {
        return 1;
    }
    let mut total = 0;
    for y in 0..n {
        if used2 >> y & 1 != 0 {
            continue;
        }
        let v = g.mul(g.inv(g.mul(pi1[x], y)), f[x]);
        if used3 >> v & 1 != 0 {
            continue;
        }
        total += extend_triple(g, f, pi1, x + 1, used2 | 1 << y, used3 | 1 << v);
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionStats {
    /// Unordered pairs `i < j` with `f(i) = f(j)`.
    pub coll: u64,
    /// `exp(-coll/n^2)`.
    pub singular_series: f64,
    /// Truncation `sum_{2k <= m} (-coll/n^2)^k / k!`.
    pub truncated_series: BigRational,
    pub m: usize,
}

pub fn collision_stats(f: &TargetFunction, m: usize) -> CollisionStats {
    let n = f.len();
    let mut fibre = vec![0u64; n];
    for &v in f.values() {
        fibre[v] += 1;
    }
    let coll: u64 = fibre.iter().map(|&k| k * k.saturating_sub(1) / 2).sum();
    let n2 = (n * n).max(1) as i64;
    let x = -ratio(coll as i64, n2);
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for k in 0..=m / 2 {
        if k > 0 {
            term = term * &x / ratio(k as i64, 1);
        }
        sum += &term;
    }
    CollisionStats {
        coll,
        singular_series: (-(coll as f64) / n2 as f64).exp(),
        truncated_series: sum,
        m,
    }
}

impl CollisionStats {
    pub fn truncated_f64(&self) -> f64 {
        self.truncated_series.to_f64().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn g(s: &str) -> FiniteGroup {
        s.parse::<GroupSpec>().unwrap().build().unwrap()
    }

    /// Checks every permutation of the group directly.
    fn cm_brute(g: &FiniteGroup) -> u64 {
        let n = g.order();
        let mut phi: Vec<usize> = (0..n).collect();
        let mut count = 0;
        loop {
            let mut seen = vec![false; n];
            if (0..n).all(|x| !std::mem::replace(&mut seen[g.mul(x, phi[x])], true)) {
                count += 1;
            }
            if !next_permutation(&mut phi) {
                return count;
            }
        }
    }

    #[test]
    fn small_complete_mapping_counts() {
        assert_eq!(
            count_complete_mappings(&FiniteGroup::trivial()).unwrap(),
            BigUint::from(1u32)
        );
        assert_eq!(
            count_complete_mappings(&g("cyclic:2")).unwrap(),
            BigUint::zero()
        );
        assert_eq!(cm_brute(&g("cyclic:5")), 15);
        assert_eq!(
            count_complete_mappings(&g("cyclic:5")).unwrap(),
            BigUint::from(15u32)
        );
        for s in [
            "cyclic:3",
            "cyclic:4",
            "elementary_abelian:2,2",
            "symmetric:3",
            "cyclic:7",
            "quaternion",
            "dihedral:8",
        ] {
            let grp = g(s);
            assert_eq!(
                count_complete_mappings(&grp).unwrap(),
                BigUint::from(cm_brute(&grp)),
                "{s}"
            );
        }
    }

    #[test]
    fn search_order_does_not_matter() {
        let grp = g("symmetric:3");
        let a = count_complete_mappings_in_order(&grp, &[0, 1, 2, 3, 4, 5], 14).unwrap();
        let b = count_complete_mappings_in_order(&grp, &[5, 2, 4, 0, 3, 1], 14).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, count_complete_mappings(&grp).unwrap());
    }

    #[test]
    fn limit_is_enforced() {
        let c15 = g("cyclic:15");
        assert!(matches!(
            count_complete_mappings(&c15),
            Err(Error::LimitExceeded { .. })
        ));
    }

    /// All `n!^3` candidate triples, checked pointwise.
    fn triples_brute(g: &FiniteGroup, f: &[usize]) -> u64 {
        let n = g.order();
        let mut perms = Vec::new();
        let mut p: Vec<usize> = (0..n).collect();
        loop {
            perms.push(p.clone());
            if !next_permutation(&mut p) {
                break;
            }
        }
        let mut count = 0;
        for a in &perms {
            for b in &perms {
                for c in &perms {
                    if (0..n).all(|x| g.mul(g.mul(a[x], b[x]), c[x]) == f[x]) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn triple_counts() {
        let c3 = g("cyclic:3");
        let one = TargetFunction::identity(&c3);
        assert_eq!(triples_brute(&c3, one.values()), 18);
        assert_eq!(
            count_triple_solutions(&c3, &one).unwrap(),
            BigUint::from(18u32)
        );
        assert_eq!(
            count_triple_solutions_search(&c3, &one, 7).unwrap(),
            BigUint::from(18u32)
        );

        let f = TargetFunction::new(&c3, vec![0, 0, 1]).unwrap();
        assert!(!f.satisfies_product_condition(&c3).unwrap());
        assert_eq!(count_triple_solutions(&c3, &f).unwrap(), BigUint::zero());

        let t = FiniteGroup::trivial();
        assert_eq!(
            count_triple_solutions(&t, &TargetFunction::identity(&t)).unwrap(),
            BigUint::one()
        );

        let s3 = g("symmetric:3");
        let f = TargetFunction::new(&s3, vec![1, 2, 0, 3, 4, 5]).unwrap();
        assert_eq!(
            count_triple_solutions(&s3, &f).unwrap(),
            BigUint::from(triples_brute(&s3, f.values()))
        );
    }

    #[test]
    fn wrong_group_is_rejected() {
        let c3 = g("cyclic:3");
        let f = TargetFunction::identity(&g("cyclic:4"));
        assert_eq!(count_triple_solutions(&c3, &f), Err(Error::WrongGroup));
    }

    #[test]
    fn collisions() {
        let c4 = g("cyclic:4");
        let s = collision_stats(&TargetFunction::identity(&c4), 4);
        assert_eq!(s.coll, 6);
        let s = collision_stats(&TargetFunction::new(&c4, vec![0, 1, 2, 3]).unwrap(), 4);
        assert_eq!(s.coll, 0);
        assert_eq!(s.singular_series, 1.0);
        let s = collision_stats(&TargetFunction::new(&c4, vec![1, 1, 3, 3]).unwrap(), 4);
        assert_eq!(s.coll, 2);
        // 1 - 2/16 + (2/16)^2/2
        assert_eq!(
            s.truncated_series,
            ratio(1, 1) - ratio(1, 8) + ratio(1, 128)
        );
    }

    #[test]
    fn target_text_format() {
        let c3 = g("cyclic:3");
        let f = TargetFunction::from_text(&c3, "0 2 1\n").unwrap();
        assert_eq!(f.values(), &[0, 2, 1]);
        assert_eq!(f.to_text(), "0 2 1\n");
        assert!(TargetFunction::from_text(&c3, "0 3 1").is_err());
        assert!(TargetFunction::from_text(&c3, "0 1").is_err());
    }
}
