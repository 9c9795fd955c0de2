//! Normalized triple convolutions of measurability indicators.
//!
//! For a partition triple on a base set `Y` the raw quantity is
//! `c_P1 * c_P2 * c_P3 (f)`: the probability, over uniform `h1, h2` in
//! `G^Y`, that `h1` is `P1`-measurable, `h2` is `P2`-measurable and
//! `h3 = (h1 h2)^-1 f` is `P3`-measurable. It does not depend on the base
//! set chosen, and it factors over connected components.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::counting::TargetFunction;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::rational::{binomial, pow_i};
use crate::system::{canonical_form_limited, PartitionSystem};

/// Largest number of cell assignments one component count may visit.
pub const DEFAULT_GAMMA_BUDGET: f64 = 2e9;
/// Largest support for the subset sum defining the projected value.
pub const MAX_GAMMA_SUPPORT: usize = 20;

/// Placement of support labels into positions `0..n` of the target
/// function. Only needed when `f` is not identically the identity.
pub type Embedding<'a> = &'a dyn Fn(usize) -> usize;

/// Label `l` at position `l - 1`.
pub fn natural_embedding(label: usize) -> usize {
    label - 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaValue {
    pub system: PartitionSystem,
    pub group: String,
    pub gamma0: BigRational,
    pub gamma: BigRational,
    pub trank: usize,
}

/// Evaluates triple convolutions for one group, caching connected pieces
/// when the target function is the identity.
pub struct GammaEngine<'g> {
    group: &'g FiniteGroup,
    budget: f64,
    cache: Mutex<HashMap<Vec<u8>, BigRational>>,
}

impl<'g> GammaEngine<'g> {
    pub fn new(group: &'g FiniteGroup) -> Self {
        Self::with_budget(group, DEFAULT_GAMMA_BUDGET)
    }

    pub fn with_budget(group: &'g FiniteGroup, budget: f64) -> Self {
        GammaEngine {
            group,
            budget,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        self.group
    }

    /// `c_P1 * c_P2 * c_P3 (f)` for any triple.
    pub fn convolution(
        &self,
        s: &PartitionSystem,
        f: &TargetFunction,
        embed: Embedding,
    ) -> Result<BigRational> {
        f.check_group(self.group)?;
        let n = self.group.order();
        let (core, exponent) = eliminate_singletons(s);
        let mut value = pow_i(n, exponent);
        for comp in core.connected_components() {
            value *= self.component_convolution(&comp, f, embed)?;
            if value.is_zero() {
                break;
            }
        }
        Ok(value)
    }

    fn component_convolution(
        &self,
        comp: &PartitionSystem,
        f: &TargetFunction,
        embed: Embedding,
    ) -> Result<BigRational> {
        if !f.is_identity() {
            return count_component(self.group, comp, f, embed, self.budget);
        }
        let key = canonical_form_limited(comp, 32)?.code;
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = count_component(self.group, comp, f, embed, self.budget)?;
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// `n^trank * c_P1 * c_P2 * c_P3 (f)`.
    pub fn gamma0(
        &self,
        s: &PartitionSystem,
        f: &TargetFunction,
        embed: Embedding,
    ) -> Result<BigRational> {
        let n = self.group.order();
        Ok(pow_i(n, s.trank() as i64) * self.convolution(s, f, embed)?)
    }

    /// Alternating sum of `gamma0` over restrictions to subsets of the
    /// support; zero for triples that are not systems.
    pub fn gamma(
        &self,
        s: &PartitionSystem,
        f: &TargetFunction,
        embed: Embedding,
    ) -> Result<BigRational> {
        f.check_group(self.group)?;
        if !s.is_system() {
            return Ok(BigRational::zero());
        }
        let x = s.support();
        if x.len() > MAX_GAMMA_SUPPORT {
            return Err(Error::BudgetExceeded {
                what: "subsets of the support",
                cost: 2f64.powi(x.len() as i32),
                budget: 2f64.powi(MAX_GAMMA_SUPPORT as i32),
            });
        }
        let n = self.group.order();
        let mut total = BigRational::zero();
        for mask in 0u32..1 << x.len() {
            let y: Vec<usize> = (0..x.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| x[i])
                .collect();
            let (sub, t) = restrict_with_exponent(s, &y)?;
            let term = self.gamma0(&sub, f, embed)? * pow_i(n, -t);
            if (x.len() - y.len()).is_multiple_of(2) {
                total += term;
            } else {
                total -= term;
            }
        }
        Ok(total)
    }

    /// Both values, for the identity target.
    pub fn evaluate(&self, s: &PartitionSystem) -> Result<GammaValue> {
        let one = TargetFunction::identity(self.group);
        Ok(GammaValue {
            system: s.clone(),
            group: self.group.name().to_string(),
            gamma0: self.gamma0(s, &one, &natural_embedding)?,
            gamma: self.gamma(s, &one, &natural_embedding)?,
            trank: s.trank(),
        })
    }
}

/// `gamma0` for a single evaluation, with labels placed by
/// [`natural_embedding`].
pub fn gamma0(s: &PartitionSystem, g: &FiniteGroup, f: &TargetFunction) -> Result<BigRational> {
    GammaEngine::new(g).gamma0(s, f, &natural_embedding)
}

pub fn gamma(s: &PartitionSystem, g: &FiniteGroup, f: &TargetFunction) -> Result<BigRational> {
    GammaEngine::new(g).gamma(s, f, &natural_embedding)
}

/// The restricted triple `P_Y` and the exponent
/// `t = trank(P_Y) - trank(P) + sum_i (cork P_i - cork(P_i ∩ Y))`.
pub fn restrict_with_exponent(s: &PartitionSystem, y: &[usize]) -> Result<(PartitionSystem, i64)> {
    let support = s.support();
    if y.iter().any(|v| support.binary_search(v).is_err()) {
        return Err(Error::NotSubset);
    }
    let sub = s.restrict(y);
    let lost: i64 = (0..3)
        .map(|i| s.part(i).cork() as i64 - sub.part(i).cork() as i64)
        .sum();
    let t = sub.trank() as i64 - s.trank() as i64 + lost;
    Ok((sub, t))
}

/// Removes points that are singletons in some partition.
///
/// Such a point's singleton variable solves its own equation, so the point
/// can be dropped; other singleton variables at that point become free.
/// Each dropped point with `k` singleton coordinates scales the normalized
/// convolution by `n^(k - 3)`. Returns the remaining system and the total
/// exponent.
pub fn eliminate_singletons(s: &PartitionSystem) -> (PartitionSystem, i64) {
    let mut cur = s.clone();
    let mut exponent = 0i64;
    loop {
        let support = cur.support();
        let pick = support
            .iter()
            .copied()
            .find(|&x| (0..3).any(|i| cur.part(i).cell_of(x).is_none()));
        let Some(x) = pick else { break };
        let singles = (0..3).filter(|&i| cur.part(i).cell_of(x).is_none()).count() as i64;
        exponent += singles - 3;
        let rest: Vec<usize> = support.into_iter().filter(|&v| v != x).collect();
        cur = cur.restrict(&rest);
    }
    (cur, exponent)
}

/// `n^(-2k) N` for a connected system on `k` points, where `N` counts
/// measurable `(h1, h2, h3)` with `h1 h2 h3 = f` pointwise.
///
/// `(h1, h2, h3) -> (h1 c, c^-1 h2 c', c'^-1 h3)` acts freely on solutions,
/// so `N = n^2` times the number of solutions with two coordinates fixed
/// to the identity at the first point. One coordinate (the one with the
/// fewest cells) is enumerated; the other two are propagated through the
/// cells of their join.
fn count_component(
    g: &FiniteGroup,
    comp: &PartitionSystem,
    f: &TargetFunction,
    embed: Embedding,
    budget: f64,
) -> Result<BigRational> {
    let points = comp.support();
    let k = points.len();
    let n = g.order();
    let target: Vec<usize> = if f.is_identity() {
        vec![g.identity(); k]
    } else {
        points
            .iter()
            .map(|&x| {
                let pos = embed(x);
                f.values().get(pos).copied().ok_or_else(|| {
                    Error::BadParameter(format!(
                        "label {x} placed at position {pos}, outside 0..{n}"
                    ))
                })
            })
            .collect::<Result<_>>()?
    };
    let cell: Vec<Vec<usize>> = (0..3).map(|i| comp.part(i).block_vector(&points)).collect();
    let ncells: Vec<usize> = (0..3).map(|i| comp.part(i).num_cells()).collect();
    let a = (0..3).min_by_key(|&i| ncells[i]).unwrap();
    let (b, c) = match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let cost = (n as f64).powi(ncells[a] as i32 - 1) * (k * n) as f64;
    if cost > budget {
        return Err(Error::BudgetExceeded {
            what: "measurable assignments for one component",
            cost,
            budget,
        });
    }
    // members[i][cell] = indices of points in that cell of partition i
    let members: Vec<Vec<Vec<usize>>> = (0..3)
        .map(|i| {
            let mut m = vec![Vec::new(); ncells[i]];
            for (p, &cl) in cell[i].iter().enumerate() {
                m[cl].push(p);
            }
            m
        })
        .collect();
    // cells of the b-partition grouped by the components of (P_b v P_c)
    let bc_join = comp.part(b).join(comp.part(c));
    let bc_groups: Vec<usize> = bc_join
        .cells()
        .iter()
        .map(|cl| cell[b][points.binary_search(&cl[0]).unwrap()])
        .collect();
    let x0_group = bc_groups
        .iter()
        .position(|&cb| members[b][cb].contains(&0))
        .unwrap();

    // solve h1 h2 h3 = t for the coordinate `want` given the other two
    let solve = |want: usize, vals: [usize; 3], t: usize| -> usize {
        match want {
            0 => g.mul(t, g.inv(g.mul(vals[1], vals[2]))),
            1 => g.mul(g.mul(g.inv(vals[0]), t), g.inv(vals[2])),
            _ => g.mul(g.inv(g.mul(vals[0], vals[1])), t),
        }
    };
    const UNSET: usize = usize::MAX;
    let mut va = vec![0usize; ncells[a]];
    let mut vb = vec![UNSET; ncells[b]];
    let mut vc = vec![UNSET; ncells[c]];
    let mut stack: Vec<(bool, usize)> = Vec::new();

    // assigns `value` to b-cell `seed` and follows the forced values
    let mut propagate =
        |va: &[usize], seed: usize, value: usize, vb: &mut [usize], vc: &mut [usize]| -> bool {
            stack.clear();
            vb[seed] = value;
            stack.push((true, seed));
            while let Some((is_b, cl)) = stack.pop() {
                let (from, to) = if is_b { (b, c) } else { (c, b) };
                let known = if is_b { vb[cl] } else { vc[cl] };
                for &p in &members[from][cl] {
                    let mut vals = [0usize; 3];
                    vals[a] = va[cell[a][p]];
                    vals[from] = known;
                    let need = solve(to, vals, target[p]);
                    let dest = cell[to][p];
                    let slot = if is_b { &mut vc[dest] } else { &mut vb[dest] };
                    if *slot == UNSET {
                        *slot = need;
                        stack.push((!is_b, dest));
                    } else if *slot != need {
                        return false;
                    }
                }
            }
            true
        };

    let mut total = BigInt::zero();
    let free: Vec<usize> = (0..ncells[a]).filter(|&cl| cl != cell[a][0]).collect();
    let mut digits = vec![0usize; free.len()];
    loop {
        for (i, &cl) in free.iter().enumerate() {
            va[cl] = digits[i];
        }
        va[cell[a][0]] = 0;
        let mut product = BigInt::one();
        for (gi, &seed) in bc_groups.iter().enumerate() {
            let mut count = 0u64;
            let values: Vec<usize> = if gi == x0_group {
                // h_b at the first point is the identity
                vec![0]
            } else {
                (0..n).collect()
            };
            let seed = if gi == x0_group { cell[b][0] } else { seed };
            for v in values {
                if propagate(&va, seed, v, &mut vb, &mut vc) {
                    count += 1;
                }
                vb.fill(UNSET);
                vc.fill(UNSET);
            }
            if count == 0 {
                product = BigInt::zero();
                break;
            }
            product *= count;
        }
        total += product;
        // next assignment of the free a-cells
        let mut i = 0;
        while i < digits.len() {
            digits[i] += 1;
            if digits[i] < n {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == digits.len() {
            break;
        }
    }
    let numer = total * BigInt::from(n) * BigInt::from(n);
    Ok(BigRational::new(
        numer,
        num_traits::pow(BigInt::from(n), 2 * k),
    ))
}

/// `sum over (a, b) != (0, 0) of C(m,a) C(m,b) n^-ceil((a+b)/2)`.
pub fn gamma_deviation_bound(n: usize, m: usize) -> BigRational {
    let mut total = BigRational::zero();
    for a in 0..=m {
        for b in 0..=m {
            if a == 0 && b == 0 {
                continue;
            }
            let w = BigRational::from_integer(binomial(m, a) * binomial(m, b));
            total += w * pow_i(n, -((a + b).div_ceil(2) as i64));
        }
    }
    total
}

/// `(1 + n^-1/2)^(2m) = (1 + 1/sqrt n)^(2m)`, as a float.
pub fn gamma_magnitude_bound(n: usize, m: usize) -> f64 {
    (1.0 + 1.0 / (n as f64).sqrt()).powi(2 * m as i32)
}

/// Whether `|x| <= bound` for an exact value and a float bound, with the
/// float comparison made conservative by a relative margin of `1e-12`.
pub fn abs_at_most(x: &BigRational, bound: f64) -> bool {
    crate::rational::to_f64(&x.abs()) <= bound * (1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use crate::partition::Partition;
    use crate::rational::ratio;
    use crate::system::tests::arb_genuine_system;
    use proptest::prelude::*;

    fn g(s: &str) -> FiniteGroup {
        s.parse::<GroupSpec>().unwrap().build().unwrap()
    }

    fn sys(s: &str) -> PartitionSystem {
        let p: Vec<&str> = s.split(';').collect();
        PartitionSystem::new(
            Partition::parse(p[0]).unwrap(),
            Partition::parse(p[1]).unwrap(),
            Partition::parse(p[2]).unwrap(),
        )
    }

    /// Counts all `(h1, h2)` in `G^Y x G^Y` directly.
    fn convolution_brute(s: &PartitionSystem, grp: &FiniteGroup, f: &[usize]) -> BigRational {
        let y = s.support();
        let k = y.len();
        let n = grp.order();
        let measurable = |h: &[usize], p: &Partition| {
            p.cells().iter().all(|c| {
                let first = h[y.binary_search(&c[0]).unwrap()];
                c.iter().all(|x| h[y.binary_search(x).unwrap()] == first)
            })
        };
        let total = n.pow(k as u32);
        let decode = |mut code: usize| -> Vec<usize> {
            (0..k)
                .map(|_| {
                    let d = code % n;
                    code /= n;
                    d
                })
                .collect()
        };
        let mut count = 0u64;
        for c1 in 0..total {
            let h1 = decode(c1);
            if !measurable(&h1, s.part(0)) {
                continue;
            }
            for c2 in 0..total {
                let h2 = decode(c2);
                if !measurable(&h2, s.part(1)) {
                    continue;
                }
                let h3: Vec<usize> = (0..k)
                    .map(|i| grp.mul(grp.inv(grp.mul(h1[i], h2[i])), f[y[i] - 1]))
                    .collect();
                if measurable(&h3, s.part(2)) {
                    count += 1;
                }
            }
        }
        BigRational::new(BigInt::from(count), num_traits::pow(BigInt::from(n), 2 * k))
    }

    #[test]
    fn table_values() {
        for spec in [
            "cyclic:3",
            "cyclic:4",
            "elementary_abelian:2,2",
            "symmetric:3",
            "cyclic:7",
        ] {
            let grp = g(spec);
            let n = grp.order() as i64;
            let one = TargetFunction::identity(&grp);
            let p0 = sys("{1,2};{1,2};{1,2}");
            assert_eq!(gamma0(&p0, &grp, &one).unwrap(), ratio(1, 1));
            assert_eq!(gamma(&p0, &grp, &one).unwrap(), ratio(n - 1, n), "{spec}");
            let klein = sys("{1,2},{3,4};{1,3},{2,4};{1,4},{2,3}");
            let inv = grp.invariants().involution_fraction;
            assert_eq!(
                gamma0(&klein, &grp, &one).unwrap(),
                ratio(*inv.numer() as i64, *inv.denom() as i64),
                "{spec}"
            );
        }
        // C3: 81 pairs (h1, h2) of measurable functions, 27 succeed
        let c3 = g("cyclic:3");
        let klein = sys("{1,2},{3,4};{1,3},{2,4};{1,4},{2,3}");
        assert_eq!(
            gamma0(&klein, &c3, &TargetFunction::identity(&c3)).unwrap(),
            ratio(1, 3)
        );
    }

    #[test]
    fn restriction_exponents() {
        let p0 = sys("{1,2};{1,2};{1,2}");
        let (s, t) = restrict_with_exponent(&p0, &[1, 2]).unwrap();
        assert_eq!((s, t), (p0.clone(), 0));
        let (s, t) = restrict_with_exponent(&p0, &[1]).unwrap();
        assert_eq!(s, PartitionSystem::empty());
        assert_eq!(t, 1);
        let (_, t) = restrict_with_exponent(&p0, &[]).unwrap();
        assert_eq!(t, 1);
        assert_eq!(restrict_with_exponent(&p0, &[3]), Err(Error::NotSubset));
        let one = TargetFunction::identity(&g("cyclic:5"));
        assert_eq!(
            gamma0(&PartitionSystem::empty(), &g("cyclic:5"), &one).unwrap(),
            ratio(1, 1)
        );
    }

    #[test]
    fn non_systems_vanish() {
        let grp = g("cyclic:3");
        let one = TargetFunction::identity(&grp);
        let t = sys("{1,2};{1,2};{2,3}");
        assert_eq!(gamma(&t, &grp, &one).unwrap(), BigRational::zero());
    }

    #[test]
    fn deviation_bound_values() {
        assert_eq!(gamma_deviation_bound(4, 0), BigRational::zero());
        // (1,0), (0,1) and (1,1) each contribute 1/4
        assert_eq!(gamma_deviation_bound(4, 1), ratio(3, 4));
        let b = crate::rational::to_f64(&gamma_deviation_bound(9, 3));
        assert!(b + 1.0 <= gamma_magnitude_bound(9, 3));
    }

    #[test]
    fn fast_count_matches_brute_force_on_general_targets() {
        let grp = g("symmetric:3");
        let f = [3, 1, 4, 0, 5, 2];
        let tf = TargetFunction::new(&grp, f.to_vec()).unwrap();
        let engine = GammaEngine::new(&grp);
        for s in [
            "{1,2};{1,2};{1,2}",
            "{1,2},{3,4};{1,3},{2,4};{1,4},{2,3}",
            "{1,2,3};{1,2},{3,4};{2,4}",
            "{1,2,3,4};{1,2},{3,4};{1,2},{3,4}",
            "{1,2};{};{3,4}",
        ] {
            let s = sys(s);
            let fast = engine.convolution(&s, &tf, &natural_embedding).unwrap();
            assert_eq!(fast, convolution_brute(&s, &grp, &f), "{s}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn count_matches_brute_force(s in arb_genuine_system(), sub in proptest::collection::vec(any::<bool>(), 6), f in proptest::collection::vec(0usize..4, 6)) {
            prop_assume!(s.support_size() <= 4);
            let grp = g("elementary_abelian:2,2");
            let y: Vec<usize> = s.support().into_iter().filter(|&x| sub[x - 1]).collect();
            let t = s.restrict(&y);
            let tf = TargetFunction::new(&grp, f[..4].to_vec()).unwrap();
            let engine = GammaEngine::new(&grp);
            prop_assert_eq!(engine.convolution(&t, &tf, &natural_embedding).unwrap(), convolution_brute(&t, &grp, &f));
        }

        #[test]
        fn reordering_and_bounds(s in arb_genuine_system()) {
            let grp = g("cyclic:3");
            let engine = GammaEngine::new(&grp);
            let v = engine.evaluate(&s).unwrap();
            prop_assert!(v.gamma0 >= BigRational::zero() && v.gamma0 <= BigRational::one());
            let m = s.support_size();
            prop_assert!((&v.gamma - &v.gamma0).abs() <= gamma_deviation_bound(3, m));
            prop_assert!(abs_at_most(&v.gamma, gamma_magnitude_bound(3, m)));
            for sigma in crate::system::REORDERINGS {
                let r = engine.evaluate(&s.reorder(sigma)).unwrap();
                prop_assert_eq!(&r.gamma, &v.gamma);
                prop_assert_eq!(&r.gamma0, &v.gamma0);
            }
        }

        #[test]
        fn multiplicative(a in arb_genuine_system(), b in arb_genuine_system()) {
            prop_assume!(a.support_size() + b.support_size() <= 9);
            let grp = g("cyclic:3");
            let engine = GammaEngine::new(&grp);
            let u = a.disjoint_union(&b);
            let (va, vb, vu) = (engine.evaluate(&a).unwrap(), engine.evaluate(&b).unwrap(), engine.evaluate(&u).unwrap());
            prop_assert_eq!(vu.gamma0, &va.gamma0 * &vb.gamma0);
            prop_assert_eq!(vu.gamma, &va.gamma * &vb.gamma);
        }
    }

    #[test]
    fn pairing_deviation() {
        let grp = g("cyclic:5");
        let engine = GammaEngine::new(&grp);
        let p0 = sys("{1,2};{1,2};{1,2}");
        let mut s = p0.clone();
        for k in 1..=4 {
            let v = engine.evaluate(&s).unwrap().gamma;
            assert!((v - ratio(1, 1)).abs() <= ratio(k, 5));
            s = s.disjoint_union(&p0);
        }
    }
}
