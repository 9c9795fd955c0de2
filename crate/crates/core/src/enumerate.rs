//! Connected partition systems of bounded complexity, up to isomorphism.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::partition::{full_support_partitions, Partition};
use crate::system::{canonical_form_limited, PartitionSystem, REORDERINGS};

pub const DEFAULT_MAX_CX: usize = 3;
/// Rough count of candidate triples an enumeration may examine.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = 5e8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectedClass {
    /// Canonical representative on `{1..m}`.
    pub system: PartitionSystem,
    pub code: Vec<u8>,
    pub support_size: usize,
    pub complexity: usize,
    pub mobius: i128,
    pub automorphisms: u64,
    /// Number of pairwise non-isomorphic reorderings.
    pub reorderings: usize,
    /// Least canonical code among the reorderings.
    pub reorder_class: Vec<u8>,
}

/// All connected systems with complexity `<= max_cx` and support
/// `<= max_supp` (default `4 max_cx + 2`, beyond which none exist).
pub fn enumerate_connected(max_cx: usize, max_supp: Option<usize>) -> Result<Vec<ConnectedClass>> {
    enumerate_connected_with(max_cx, max_supp, DEFAULT_MAX_CX, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_connected_with(
    max_cx: usize,
    max_supp: Option<usize>,
    cx_limit: usize,
    budget: f64,
) -> Result<Vec<ConnectedClass>> {
    if max_cx > cx_limit {
        return Err(Error::LimitExceeded {
            what: "complexity for enumeration",
            value: max_cx as u64,
            limit: cx_limit as u64,
        });
    }
    let top = (4 * max_cx + 2).min(max_supp.unwrap_or(usize::MAX));
    if top > 16 {
        return Err(Error::LimitExceeded {
            what: "support size for enumeration",
            value: top as u64,
            limit: 16,
        });
    }
    let cost: f64 = (2..=top).map(|m| level_cost(m, max_cx)).sum();
    if cost > budget {
        return Err(Error::BudgetExceeded {
            what: "connected system enumeration",
            cost,
            budget,
        });
    }
    let mut found: BTreeMap<Vec<u8>, PartitionSystem> = BTreeMap::new();
    for m in 2..=top {
        for s in level(m, max_cx) {
            let c = canonical_form_limited(&s, 16)?;
            found.entry(c.code).or_insert(c.system);
        }
    }
    // close under reordering; reorderings keep support, complexity and connectivity
    let reps: Vec<PartitionSystem> = found.values().cloned().collect();
    for s in reps {
        for sigma in REORDERINGS {
            let c = canonical_form_limited(&s.reorder(sigma), 16)?;
            found.entry(c.code).or_insert(c.system);
        }
    }
    let mut out = Vec::with_capacity(found.len());
    for (code, system) in found {
        let mut orbit: Vec<Vec<u8>> = REORDERINGS
            .iter()
            .map(|&sigma| canonical_form_limited(&system.reorder(sigma), 16).map(|c| c.code))
            .collect::<Result<_>>()?;
        orbit.sort();
        orbit.dedup();
        let canon = canonical_form_limited(&system, 16)?;
        out.push(ConnectedClass {
            support_size: system.support_size(),
            complexity: system.complexity() as usize,
            mobius: system.mobius(),
            automorphisms: canon.automorphisms,
            reorderings: orbit.len(),
            reorder_class: orbit[0].clone(),
            system,
            code,
        });
    }
    out.sort_by(|a, b| {
        (a.support_size, a.complexity, &a.code).cmp(&(b.support_size, b.complexity, &b.code))
    });
    Ok(out)
}

/// Cork triples `c1 <= c2 <= c3` that a connected system on `m` points with
/// complexity `<= cx` can have: each cork is at least `m/2`, and
/// `lrank <= trank` bounds their sum by `m + 2 cx + 1`.
fn cork_triples(m: usize, cx: usize) -> Vec<[usize; 3]> {
    let lo = m.div_ceil(2);
    let mut out = Vec::new();
    for a in lo..m {
        for b in a..m {
            for c in b..m {
                if a + b + c <= m + 2 * cx + 1 {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn level_cost(m: usize, cx: usize) -> f64 {
    let by_cork = corks_histogram(m);
    cork_triples(m, cx)
        .iter()
        .map(|&[a, b, c]| {
            let types = cell_size_types(m, m - a).len() as f64;
            types * by_cork[b] as f64 * by_cork[c] as f64
        })
        .sum()
}

fn corks_histogram(m: usize) -> Vec<u64> {
    // full-support partitions of an m-set by number of cells:
    // s(m, k) = k s(m-1, k) + (m-1) s(m-2, k-1)
    let mut s = vec![vec![0u64; m + 1]; m + 1];
    s[0][0] = 1;
    for i in 1..=m {
        for k in 1..=i / 2 {
            s[i][k] = k as u64 * s[i - 1][k]
                + if i >= 2 {
                    (i as u64 - 1) * s[i - 2][k - 1]
                } else {
                    0
                };
        }
    }
    let mut by_cork = vec![0u64; m + 1];
    for k in 0..=m {
        if m >= k {
            by_cork[m - k] += s[m][k];
        }
    }
    by_cork
}

/// Multisets of cell sizes (each >= 2) summing to `m` with `k` cells,
/// in non-increasing order.
fn cell_size_types(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for s in (2..=max.min(rem)).rev() {
            if rem - s >= 2 * (k - 1) {
                cur.push(s);
                rec(rem - s, k - 1, s, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(m, k, m, &mut Vec::new(), &mut out);
    }
    out
}

type Masks = Vec<u32>;

fn to_masks(p: &Partition) -> Masks {
    p.cells()
        .iter()
        .map(|c| c.iter().fold(0u32, |acc, &x| acc | 1 << (x - 1)))
        .collect()
}

fn from_masks(masks: &[u32]) -> Partition {
    let cells = masks
        .iter()
        .map(|&mk| {
            (0..32)
                .filter(|b| mk >> b & 1 == 1)
                .map(|b| b + 1)
                .collect()
        })
        .collect();
    Partition::new(cells).expect("masks are disjoint")
}

/// Join of two full-support partitions of the same points.
fn join_masks(a: &[u32], b: &[u32]) -> Masks {
    let mut comps: Masks = a.to_vec();
    for &mk in b {
        let mut merged = mk;
        comps.retain(|&c| {
            if c & merged != 0 {
                merged |= c;
                false
            } else {
                true
            }
        });
        comps.push(merged);
    }
    comps
}

fn cork_masks(p: &[u32]) -> usize {
    p.iter().map(|c| c.count_ones() as usize - 1).sum()
}

/// Connected systems on exactly `{1..m}` with complexity `<= cx`, with
/// corks in non-decreasing order; every class has such a reordering.
fn level(m: usize, cx: usize) -> Vec<PartitionSystem> {
    let all = full_support_partitions(m);
    let mut by_cork: BTreeMap<usize, Vec<Masks>> = BTreeMap::new();
    for p in &all {
        by_cork.entry(p.cork()).or_default().push(to_masks(p));
    }
    let empty = Vec::new();
    let mut jobs: Vec<(Masks, usize, usize)> = Vec::new();
    for [a, b, c] in cork_triples(m, cx) {
        for sizes in cell_size_types(m, m - a) {
            let mut next = 0;
            let p1: Masks = sizes
                .iter()
                .map(|&s| {
                    let mk = ((1u32 << s) - 1) << next;
                    next += s;
                    mk
                })
                .collect();
            jobs.push((p1, b, c));
        }
    }
    let full = (1u32 << m) - 1;
    let bound = m + cx;
    let run = |(p1, b, c): &(Masks, usize, usize)| -> Vec<PartitionSystem> {
        let mut out = Vec::new();
        let c1 = cork_masks(p1);
        for p2 in by_cork.get(b).unwrap_or(&empty) {
            let j12 = join_masks(p1, p2);
            if c + cork_masks(&j12) > bound {
                continue;
            }
            for p3 in by_cork.get(c).unwrap_or(&empty) {
                let all3 = join_masks(&j12, p3);
                if all3.len() != 1 || all3[0] != full {
                    continue;
                }
                if c1 + cork_masks(&join_masks(p2, p3)) > bound
                    || b + cork_masks(&join_masks(p1, p3)) > bound
                {
                    continue;
                }
                out.push(PartitionSystem::new(
                    from_masks(p1),
                    from_masks(p2),
                    from_masks(p3),
                ));
            }
        }
        out
    };
    #[cfg(feature = "parallel")]
    let chunks: Vec<Vec<PartitionSystem>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Vec<PartitionSystem>> = jobs.iter().map(run).collect();
    chunks.into_iter().flatten().collect()
}
