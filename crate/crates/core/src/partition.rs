//! Set partitions of finite label sets, stored without singleton cells.
//!
//! Two partitions that differ only by singletons are the same value, so a
//! partition is just its list of nonsingleton cells. The support is the
//! union of those cells.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
}

fn factorial_i128(k: usize) -> i128 {
    (1..=k as i128).product()
}

impl Partition {
    /// The partition with no nonsingleton cells.
    pub fn discrete() -> Self {
        Partition::default()
    }

    /// Builds a partition from disjoint cells; singletons and empty cells
    /// are dropped.
    pub fn new(cells: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for c in &cells {
            for &x in c {
                if !seen.insert(x) {
                    return Err(Error::BadParameter(format!(
                        "label {x} appears in two cells"
                    )));
                }
            }
        }
        Ok(Self::from_disjoint(cells))
    }

    fn from_disjoint(cells: Vec<Vec<usize>>) -> Self {
        let mut cells: Vec<Vec<usize>> = cells
            .into_iter()
            .filter(|c| c.len() >= 2)
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        cells.sort_unstable();
        Partition { cells }
    }

    /// The single cell `labels` (indiscrete on those labels).
    pub fn indiscrete(labels: &[usize]) -> Self {
        Self::from_disjoint(vec![labels.to_vec()])
    }

    /// Groups `labels[i]` by `block[i]`.
    pub fn from_blocks(labels: &[usize], block: &[usize]) -> Self {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&x, &b) in labels.iter().zip(block) {
            groups.entry(b).or_default().push(x);
        }
        Self::from_disjoint(groups.into_values().collect())
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.cells.iter().flatten().copied().collect();
        s.sort_unstable();
        s
    }

    pub fn support_size(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_discrete(&self) -> bool {
        self.cells.is_empty()
    }

    /// `|supp| - #cells`, unchanged by adding or removing singletons.
    pub fn cork(&self) -> usize {
        self.cells.iter().map(|c| c.len() - 1).sum()
    }

    pub fn cell_of(&self, x: usize) -> Option<&[usize]> {
        self.cells
            .iter()
            .find(|c| c.binary_search(&x).is_ok())
            .map(Vec::as_slice)
    }

    pub fn same_cell(&self, x: usize, y: usize) -> bool {
        x == y || self.cell_of(x).is_some_and(|c| c.binary_search(&y).is_ok())
    }

    /// Finest common coarsening.
    pub fn join(&self, other: &Partition) -> Partition {
        Self::join_all([self, other])
    }

    pub fn join_all<'a>(parts: impl IntoIterator<Item = &'a Partition>) -> Partition {
        let parts: Vec<&Partition> = parts.into_iter().collect();
        let labels: Vec<usize> = parts
            .iter()
            .flat_map(|p| p.cells.iter().flatten().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |x: usize| labels.binary_search(&x).unwrap();
        let mut uf = UnionFind::new(labels.len());
        for p in &parts {
            for c in &p.cells {
                for w in c.windows(2) {
                    uf.union(index(w[0]), index(w[1]));
                }
            }
        }
        let roots: Vec<usize> = (0..labels.len()).map(|i| uf.find(i)).collect();
        Self::from_blocks(&labels, &roots)
    }

    /// Coarsest common refinement.
    pub fn meet(&self, other: &Partition) -> Partition {
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                let c: Vec<usize> = a
                    .iter()
                    .filter(|x| b.binary_search(x).is_ok())
                    .copied()
                    .collect();
                cells.push(c);
            }
        }
        Self::from_disjoint(cells)
    }

    /// Whether every cell of `self` lies inside a cell of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.cells.iter().all(|c| {
            other
                .cell_of(c[0])
                .is_some_and(|d| c.iter().all(|x| d.binary_search(x).is_ok()))
        })
    }

    /// `mu(0, P) = (-1)^cork prod (|c| - 1)!`.
    pub fn mobius(&self) -> i128 {
        let sign = if self.cork().is_multiple_of(2) { 1 } else { -1 };
        sign * self
            .cells
            .iter()
            .map(|c| factorial_i128(c.len() - 1))
            .product::<i128>()
    }

    /// Cells intersected with `y`, singletons dropped.
    pub fn restrict(&self, y: &[usize]) -> Partition {
        let ys: BTreeSet<usize> = y.iter().copied().collect();
        Self::from_disjoint(
            self.cells
                .iter()
                .map(|c| c.iter().filter(|x| ys.contains(x)).copied().collect())
                .collect(),
        )
    }

    /// Applies a label map; `map` must be injective on the support.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Partition {
        Self::from_disjoint(
            self.cells
                .iter()
                .map(|c| c.iter().map(|&x| map(x)).collect())
                .collect(),
        )
    }

    /// Block index of each label, with labels outside the support mapped to
    /// fresh singleton blocks.
    pub fn block_vector(&self, labels: &[usize]) -> Vec<usize> {
        let mut next = self.cells.len();
        labels
            .iter()
            .map(
                |&x| match self.cells.iter().position(|c| c.binary_search(&x).is_ok()) {
                    Some(i) => i,
                    None => {
                        next += 1;
                        next - 1
                    }
                },
            )
            .collect()
    }

    /// Parses `{1,2},{3,4}`; an empty string or `{}` is the discrete partition.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let t = t
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .filter(|s| s.trim_start().starts_with('{'))
            .unwrap_or(t);
        let mut cells = Vec::new();
        for chunk in t.split('}') {
            let chunk = chunk.trim().trim_start_matches(',').trim();
            if chunk.is_empty() {
                continue;
            }
            let body = chunk
                .strip_prefix('{')
                .ok_or_else(|| Error::Parse(format!("expected `{{` in partition `{text}`")))?;
            let cell = body
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("bad label `{s}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(cell);
        }
        Self::new(cells).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self
            .cells
            .iter()
            .map(|c| {
                let xs: Vec<String> = c.iter().map(usize::to_string).collect();
                format!("{{{}}}", xs.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `mu(P, Q)` in the partition lattice, for `P <= Q`.
///
/// Each cell of `Q` (implicit singletons included) contributes
/// `(k - 1)!` where `k` counts the blocks of `P` inside it.
pub fn mobius_pair(p: &Partition, q: &Partition) -> Result<i128> {
    if !p.refines(q) {
        return Err(Error::NotRefinement);
    }
    let mut value: i128 = 1;
    for c in q.cells() {
        let mut blocks = 0;
        let mut covered = BTreeSet::new();
        for &x in c {
            if covered.contains(&x) {
                continue;
            }
            blocks += 1;
            match p.cell_of(x) {
                Some(pc) => covered.extend(pc.iter().copied()),
                None => {
                    covered.insert(x);
                }
            }
        }
        value *= factorial_i128(blocks - 1);
    }
    let diff = q.cork() - p.cork();
    Ok(if diff.is_multiple_of(2) {
        value
    } else {
        -value
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Calls `visit` with every restricted growth string of length `m`.
pub fn for_each_growth_string(m: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(a: &mut Vec<usize>, m: usize, max: usize, visit: &mut dyn FnMut(&[usize])) {
        if a.len() == m {
            visit(a);
            return;
        }
        let top = if a.is_empty() { 0 } else { max + 1 };
        for b in 0..=top {
            a.push(b);
            rec(a, m, max.max(b), visit);
            a.pop();
        }
    }
    rec(&mut Vec::with_capacity(m), m, 0, &mut visit);
}

/// Every partition of the label set `base` (Bell-number many).
pub fn all_partitions(base: &[usize]) -> Vec<Partition> {
    let mut out = Vec::new();
    for_each_growth_string(base.len(), |a| out.push(Partition::from_blocks(base, a)));
    out
}

/// Partitions of `{1..m}` with no singleton cell.
pub fn full_support_partitions(m: usize) -> Vec<Partition> {
    let labels: Vec<usize> = (1..=m).collect();
    let mut out = Vec::new();
    for_each_growth_string(m, |a| {
        let mut sizes = vec![0usize; m];
        for &b in a {
            sizes[b] += 1;
        }
        if sizes.iter().all(|&s| s != 1) {
            out.push(Partition::from_blocks(&labels, a));
        }
    });
    out
}
