//! Partition triples and partition systems.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::partition::Partition;

pub const DEFAULT_CANON_LIMIT: usize = 10;

/// A triple of partitions. It is a *system* when all three have the same
/// support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartitionSystem {
    parts: [Partition; 3],
}

/// The six orderings of the three coordinates.
pub const REORDERINGS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl PartitionSystem {
    pub fn new(p1: Partition, p2: Partition, p3: Partition) -> Self {
        PartitionSystem {
            parts: [p1, p2, p3],
        }
    }

    pub fn empty() -> Self {
        PartitionSystem::default()
    }

    pub fn parts(&self) -> &[Partition; 3] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &Partition {
        &self.parts[i]
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.parts.iter().flat_map(|p| p.support()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn support_size(&self) -> usize {
        self.support().len()
    }

    pub fn is_system(&self) -> bool {
        let s = self.parts[0].support();
        self.parts[1].support() == s && self.parts[2].support() == s
    }

    pub fn corks(&self) -> [usize; 3] {
        [
            self.parts[0].cork(),
            self.parts[1].cork(),
            self.parts[2].cork(),
        ]
    }

    /// Sum over connected components of [`Self::trank_joint`]. Agrees with
    /// the joint maximum on connected triples and is additive in general.
    pub fn trank(&self) -> usize {
        let comps = self.connected_components();
        if comps.len() <= 1 {
            return self.trank_joint();
        }
        comps.iter().map(Self::trank_joint).sum()
    }

    /// Maximum over coordinate orders of `cork(P_a) + cork(P_b v P_c)`,
    /// taken once over the whole triple. On a disjoint union whose pieces
    /// prefer different orders this is smaller than the sum of the parts.
    pub fn trank_joint(&self) -> usize {
        REORDERINGS
            .iter()
            .map(|&[a, b, c]| self.parts[a].cork() + self.parts[b].join(&self.parts[c]).cork())
            .max()
            .unwrap()
    }

    /// `(c1 + c2 + c3 + cork(P1 v P2 v P3)) / 2`.
    pub fn lrank(&self) -> Ratio<i64> {
        let [a, b, c] = self.corks();
        Ratio::new((a + b + c + self.full_join().cork()) as i64, 2)
    }

    /// `trank - |supp|`; negative only for triples that are not systems.
    pub fn complexity(&self) -> i64 {
        self.trank() as i64 - self.support_size() as i64
    }

    /// Product of the three partition Möbius values.
    pub fn mobius(&self) -> i128 {
        self.parts.iter().map(Partition::mobius).product()
    }

    pub fn full_join(&self) -> Partition {
        Partition::join_all(&self.parts)
    }

    pub fn is_connected(&self) -> bool {
        let j = self.full_join();
        j.num_cells() == 1 && j.support_size() == self.support_size()
    }

    /// Restrictions to the cells of `P1 v P2 v P3`, ordered by least label.
    pub fn connected_components(&self) -> Vec<PartitionSystem> {
        self.full_join()
            .cells()
            .iter()
            .map(|cell| self.restrict(cell))
            .collect()
    }

    /// Each partition intersected with `y`.
    pub fn restrict(&self, y: &[usize]) -> PartitionSystem {
        PartitionSystem {
            parts: [
                self.parts[0].restrict(y),
                self.parts[1].restrict(y),
                self.parts[2].restrict(y),
            ],
        }
    }

    /// `self` together with a copy of `other` moved past the largest label.
    pub fn disjoint_union(&self, other: &PartitionSystem) -> PartitionSystem {
        let shift = self.support().last().copied().unwrap_or(0);
        let moved = other.relabel(|x| x + shift);
        PartitionSystem {
            parts: [0, 1, 2].map(|i| {
                let mut cells = self.parts[i].cells().to_vec();
                cells.extend(moved.parts[i].cells().iter().cloned());
                Partition::new(cells).expect("shifted supports are disjoint")
            }),
        }
    }

    /// `(P_{s0}, P_{s1}, P_{s2})`.
    pub fn reorder(&self, sigma: [usize; 3]) -> PartitionSystem {
        PartitionSystem {
            parts: sigma.map(|i| self.parts[i].clone()),
        }
    }

    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> PartitionSystem {
        PartitionSystem {
            parts: [0, 1, 2].map(|i| self.parts[i].relabel(&map)),
        }
    }

    /// Relabels the support onto `1..=|supp|` preserving order.
    pub fn compact(&self) -> PartitionSystem {
        let s = self.support();
        self.relabel(|x| s.binary_search(&x).unwrap() + 1)
    }

    /// Parses `m; cells; cells; cells`.
    pub fn parse(text: &str) -> Result<Self> {
        let fields: Vec<&str> = text.trim().split(';').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "expected `m; P1; P2; P3`, got `{text}`"
            )));
        }
        let m: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad support size `{}`: {e}", fields[0])))?;
        let s = PartitionSystem::new(
            Partition::parse(fields[1])?,
            Partition::parse(fields[2])?,
            Partition::parse(fields[3])?,
        );
        if s.support_size() != m {
            return Err(Error::Parse(format!(
                "support has {} labels, header says {m}",
                s.support_size()
            )));
        }
        Ok(s)
    }
}

impl fmt::Display for PartitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}; {}; {}; {}",
            self.support_size(),
            self.parts[0],
            self.parts[1],
            self.parts[2]
        )
    }
}

/// Result of canonical labelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    /// The system relabelled onto `1..=m`.
    pub system: PartitionSystem,
    /// Equal for two systems iff they are isomorphic.
    pub code: Vec<u8>,
    pub automorphisms: u64,
}

/// Canonical labelling with the default support limit.
pub fn canonical_form(s: &PartitionSystem) -> Result<Canonical> {
    canonical_form_limited(s, DEFAULT_CANON_LIMIT)
}

pub fn automorphism_count(s: &PartitionSystem) -> Result<u64> {
    Ok(canonical_form(s)?.automorphisms)
}

/// Lexicographically least encoding over all orderings of the support.
///
/// Position `k` of an ordering is encoded by the point's colour (its three
/// cell sizes) and, for each partition, the first-occurrence index of its
/// cell along the ordering. Orderings that share the least prefix are
/// extended level by level; those that survive to the end differ by
/// automorphisms, so their number is `|Aut|`.
pub fn canonical_form_limited(s: &PartitionSystem, limit: usize) -> Result<Canonical> {
    let support = s.support();
    let m = support.len();
    if m > limit {
        return Err(Error::LimitExceeded {
            what: "support size for canonical form",
            value: m as u64,
            limit: limit as u64,
        });
    }
    // block[i][x]: cell index of point x in partition i (singletons get fresh ids)
    let block: Vec<Vec<usize>> = s.parts.iter().map(|p| p.block_vector(&support)).collect();
    let colour: Vec<[u8; 3]> = (0..m)
        .map(|x| [0, 1, 2].map(|i| s.parts[i].cell_of(support[x]).map_or(1, |c| c.len()) as u8))
        .collect();

    #[derive(Clone)]
    struct Node {
        order: Vec<usize>,
        // first-occurrence index assigned to each cell id, per partition
        seen: [Vec<u8>; 3],
        next: [u8; 3],
    }
    let unseen = u8::MAX;
    let root = Node {
        order: Vec::new(),
        seen: [vec![unseen; m], vec![unseen; m], vec![unseen; m]],
        next: [0; 3],
    };
    let mut level = vec![root];
    let mut code = Vec::with_capacity(6 * m);
    for _ in 0..m {
        let mut best: Option<[u8; 6]> = None;
        let mut next_level: Vec<Node> = Vec::new();
        for node in &level {
            for x in 0..m {
                if node.order.contains(&x) {
                    continue;
                }
                let mut key = [0u8; 6];
                key[..3].copy_from_slice(&colour[x]);
                for i in 0..3 {
                    let b = block[i][x];
                    key[3 + i] = if node.seen[i][b] == unseen {
                        node.next[i]
                    } else {
                        node.seen[i][b]
                    };
                }
                match best {
                    Some(bk) if key > bk => continue,
                    Some(bk) if key < bk => next_level.clear(),
                    _ => {}
                }
                best = Some(key);
                let mut child = node.clone();
                child.order.push(x);
                for i in 0..3 {
                    let b = block[i][x];
                    if child.seen[i][b] == unseen {
                        child.seen[i][b] = child.next[i];
                        child.next[i] += 1;
                    }
                }
                next_level.push(child);
            }
        }
        code.extend_from_slice(&best.expect("nonempty level"));
        level = next_level;
    }
    let automorphisms = level.len().max(1) as u64;
    let order = &level[0].order;
    let mut position = BTreeMap::new();
    for (k, &x) in order.iter().enumerate() {
        position.insert(support[x], k + 1);
    }
    let system = s.relabel(|x| position[&x]);
    Ok(Canonical {
        system,
        code,
        automorphisms,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::group::next_permutation;
    use proptest::prelude::*;

    pub(crate) fn sys(s: &str) -> PartitionSystem {
        let parts: Vec<&str> = s.split(';').collect();
        PartitionSystem::new(
            Partition::parse(parts[0]).unwrap(),
            Partition::parse(parts[1]).unwrap(),
            Partition::parse(parts[2]).unwrap(),
        )
    }

    fn p0() -> PartitionSystem {
        sys("{1,2};{1,2};{1,2}")
    }

    fn klein() -> PartitionSystem {
        sys("{1,2},{3,4};{1,3},{2,4};{1,4},{2,3}")
    }

    #[test]
    fn trank_adds_over_components_with_different_best_orders() {
        let a = sys("{1,3},{2,4};{1,2,3,4};{1,2},{3,4}");
        let b = a.reorder([1, 0, 2]);
        assert_eq!((a.trank(), b.trank()), (6, 6));
        let u = a.disjoint_union(&b);
        assert_eq!(u.trank_joint(), 11);
        assert_eq!(u.trank(), 12);
    }

    #[test]
    fn ranks_of_small_systems() {
        assert_eq!(p0().trank(), 2);
        assert_eq!(p0().complexity(), 0);
        assert_eq!(klein().complexity(), 1);
        assert_eq!(klein().trank(), 5);
        let p7 = sys("{1,2,3,4};{1,2,3,4};{1,2,3,4}");
        assert_eq!(p7.complexity(), 2);
        assert_eq!(p0().lrank(), Ratio::new(2, 1));
        assert_eq!(klein().lrank(), Ratio::new(9, 2));
        assert!(!sys("{1,2};{1,2};{2,3}").is_system());
    }

    #[test]
    fn components() {
        let two = p0().disjoint_union(&p0());
        assert_eq!(two, sys("{1,2},{3,4};{1,2},{3,4};{1,2},{3,4}"));
        let comps = two.connected_components();
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert_eq!(
                canonical_form(c).unwrap().code,
                canonical_form(&p0()).unwrap().code
            );
        }
        assert_eq!(klein().connected_components(), vec![klein()]);
        let s = sys("{1,2},{3,4,5};{1,2},{3,4,5};{1,2},{3,4,5}");
        let supports: Vec<Vec<usize>> = s
            .connected_components()
            .iter()
            .map(|c| c.support())
            .collect();
        assert_eq!(supports, vec![vec![1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn automorphisms() {
        assert_eq!(automorphism_count(&p0()).unwrap(), 2);
        assert_eq!(
            automorphism_count(&sys("{1,2,3};{1,2,3};{1,2,3}")).unwrap(),
            6
        );
        assert_eq!(
            automorphism_count(&sys("{1,2,3,4};{1,2},{3,4};{1,2},{3,4}")).unwrap(),
            8
        );
        assert_eq!(automorphism_count(&klein()).unwrap(), 4);
        assert_eq!(automorphism_count(&p0().disjoint_union(&p0())).unwrap(), 8);
        assert_eq!(automorphism_count(&PartitionSystem::empty()).unwrap(), 1);
    }

    #[test]
    fn limit() {
        let big = sys("{1,2,3,4,5,6,7,8,9,10,11};{1,2};{3,4}");
        assert!(matches!(
            canonical_form(&big),
            Err(Error::LimitExceeded { .. })
        ));
    }

    #[test]
    fn text_format() {
        let k = klein();
        assert_eq!(k.to_string(), "4; {1,2},{3,4}; {1,3},{2,4}; {1,4},{2,3}");
        assert_eq!(PartitionSystem::parse(&k.to_string()).unwrap(), k);
        assert!(PartitionSystem::parse("3; {1,2}; {1,2}; {1,2}").is_err());
    }

    /// All relabellings of the support, checked one by one.
    fn brute(s: &PartitionSystem) -> (PartitionSystem, u64) {
        let support = s.support();
        let m = support.len();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut best: Option<PartitionSystem> = None;
        let mut auts = 0;
        loop {
            let image = s.relabel(|x| perm[support.binary_search(&x).unwrap()] + 1);
            if image.relabel(|x| support[x - 1]) == *s {
                auts += 1;
            }
            if best.as_ref().is_none_or(|b| image < *b) {
                best = Some(image);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        (best.unwrap(), auts)
    }

    fn arb_system() -> impl Strategy<Value = PartitionSystem> {
        let labels = [1, 2, 3, 4, 5, 6];
        proptest::collection::vec(0usize..3, 18).prop_map(move |b| {
            PartitionSystem::new(
                Partition::from_blocks(&labels, &b[0..6]),
                Partition::from_blocks(&labels, &b[6..12]),
                Partition::from_blocks(&labels, &b[12..18]),
            )
        })
    }

    /// Three full-support partitions of `{1..m}`, `2 <= m <= 6`.
    pub(crate) fn arb_genuine_system() -> impl Strategy<Value = PartitionSystem> {
        (2usize..=6).prop_flat_map(|m| {
            let all = crate::partition::full_support_partitions(m);
            let k = all.len();
            (0..k, 0..k, 0..k).prop_map(move |(a, b, c)| {
                PartitionSystem::new(all[a].clone(), all[b].clone(), all[c].clone())
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn canonical_form_is_an_isomorphism_invariant(s in arb_system(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let support = s.support();
            let mut image: Vec<usize> = (100..100 + support.len()).collect();
            image.shuffle(&mut rng);
            let t = s.relabel(|x| image[support.binary_search(&x).unwrap()]);
            let (cs, ct) = (canonical_form(&s).unwrap(), canonical_form(&t).unwrap());
            prop_assert_eq!(&cs.code, &ct.code);
            prop_assert_eq!(&cs.system, &ct.system);
            let (_, auts) = brute(&s);
            prop_assert_eq!(cs.automorphisms, auts);
        }

        #[test]
        fn distinct_codes_for_non_isomorphic(a in arb_system(), b in arb_system()) {
            let (ca, cb) = (canonical_form(&a).unwrap(), canonical_form(&b).unwrap());
            let (ba, _) = brute(&a);
            let (bb, _) = brute(&b);
            prop_assert_eq!(ca.code == cb.code, ba == bb);
        }

        #[test]
        fn additivity_over_components(s in arb_system()) {
            let comps = s.connected_components();
            let supp: usize = comps.iter().map(|c| c.support_size()).sum();
            prop_assert_eq!(supp, s.support_size());
            let mu: i128 = comps.iter().map(|c| c.mobius()).product();
            prop_assert_eq!(mu, s.mobius());
            if s.is_system() {
                let tr: usize = comps.iter().map(|c| c.trank()).sum();
                prop_assert_eq!(tr, s.trank());
                let cx: i64 = comps.iter().map(|c| c.complexity()).sum();
                prop_assert_eq!(cx, s.complexity());
            }
        }

        #[test]
        fn rank_inequalities(s in arb_genuine_system()) {
            let m = s.support_size() as i64;
            let k = s.connected_components().len() as i64;
            let tr = Ratio::from_integer(s.trank() as i64);
            prop_assert!(tr >= s.lrank());
            prop_assert!(s.lrank() >= Ratio::new(5 * m, 4) - Ratio::new(k, 2));
            let [a, b, c] = s.parts().clone();
            let pairing = a == b && b == c && a.cells().iter().all(|x| x.len() == 2);
            prop_assert_eq!(s.trank() as i64 == m, pairing);
            if s.is_connected() {
                prop_assert!(m <= 4 * s.complexity() + 2);
            }
        }

        #[test]
        fn wreath_formula(s in arb_genuine_system()) {
            prop_assume!(s.is_connected() && s.support_size() <= 5);
            let aut = automorphism_count(&s).unwrap();
            let two = s.disjoint_union(&s);
            prop_assert_eq!(automorphism_count(&two).unwrap(), aut * aut * 2);
        }
    }
}
