//! Finite groups given by their multiplication table.
//!
//! Elements are the integers `0..n` and element `0` is always the identity.
//! Tables coming from outside are validated (Latin property, identity,
//! associativity) and relabelled so that the identity sits at index 0.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest order any named constructor will build.
pub const MAX_NAMED_ORDER: usize = 10_000;

#[derive(Clone)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
    name: Option<String>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("name", &self.name)
            .finish()
    }
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.table == other.table
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Validates a Cayley table and builds the group.
    ///
    /// `table[i][j]` holds the product `i*j`. If the identity is not element
    /// 0 it is swapped with element 0; every other label is kept.
    pub fn from_table(table: &[Vec<usize>]) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::BadParameter("group order must be at least 1".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::BadParameter("group order too large".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotLatin(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= n) {
                return Err(Error::BadParameter(format!(
                    "entry {bad} in row {i} is out of range 0..{n}"
                )));
            }
        }
        check_latin(table)?;

        let identity = (0..n)
            .find(|&e| (0..n).all(|j| table[e][j] == j && table[j][e] == j))
            .ok_or(Error::NoIdentity)?;

        // old label -> new label
        let mut relabel: Vec<usize> = (0..n).collect();
        relabel.swap(0, identity);
        let mut flat = vec![0u32; n * n];
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                flat[relabel[i] * n + relabel[j]] = relabel[v] as u32;
            }
        }

        if let Some((a, b, c)) = find_nonassociative(n, &flat) {
            // relabel is an involution, so it maps back to the caller's labels
            return Err(Error::NotAssociative(relabel[a], relabel[b], relabel[c]));
        }

        let mut inverse = vec![0u32; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| flat[a * n + b] == 0)
                .expect("Latin row contains identity");
            inverse[a] = b as u32;
        }
        Ok(FiniteGroup {
            order: n,
            table: flat,
            inverse,
            name: None,
        })
    }

    /// Builds a group from a trusted product function. Used by the named
    /// constructors, which produce identity-first tables by construction.
    fn from_fn(n: usize, name: String, mul: impl Fn(usize, usize) -> usize) -> Self {
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = mul(a, b) as u32;
            }
        }
        let mut inverse = vec![0u32; n];
        for a in 0..n {
            for b in 0..n {
                if table[a * n + b] == 0 {
                    inverse[a] = b as u32;
                    break;
                }
            }
        }
        debug_assert!((0..n).all(|j| table[j] as usize == j && table[j * n] as usize == j));
        FiniteGroup {
            order: n,
            table,
            inverse,
            name: Some(name),
        }
    }

    pub fn trivial() -> Self {
        Self::from_fn(1, "trivial".into(), |_, _| 0)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        check_order(n)?;
        Ok(Self::from_fn(n, format!("cyclic:{n}"), |a, b| (a + b) % n))
    }

    pub fn named(spec: &GroupSpec) -> Result<Self> {
        spec.build()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("unnamed")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    #[inline]
    pub fn identity(&self) -> usize {
        0
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Row `a` of the table: `b -> a*b`.
    pub fn row(&self, a: usize) -> &[u32] {
        &self.table[a * self.order..(a + 1) * self.order]
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| self.row(a).iter().map(|&v| v as usize).collect())
            .collect()
    }

    /// Hash of the table, used to tie target functions to their group.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.order.hash(&mut h);
        self.table.hash(&mut h);
        h.finish()
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// The subgroup generated by `gens`, sorted.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut members = vec![0usize];
        let mut i = 0;
        while i < members.len() {
            let h = members[i];
            i += 1;
            for &g in gens {
                let x = self.mul(h, g);
                if !seen[x] {
                    seen[x] = true;
                    members.push(x);
                }
            }
        }
        members.sort_unstable();
        members
    }

    /// Relabels elements by `perm[old] = new`. The identity must stay at 0.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order;
        if perm.len() != n || perm.first() != Some(&0) {
            return Err(Error::BadParameter(
                "relabelling must fix the identity".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::BadParameter("relabelling is not a bijection".into()));
            }
        }
        let mut table = vec![0u32; n * n];
        let mut inverse = vec![0u32; n];
        for a in 0..n {
            inverse[perm[a]] = perm[self.inv(a)] as u32;
            for b in 0..n {
                table[perm[a] * n + perm[b]] = perm[self.mul(a, b)] as u32;
            }
        }
        Ok(FiniteGroup {
            order: n,
            table,
            inverse,
            name: self.name.clone(),
        })
    }

    /// Parses the Cayley text format: the order on the first line, then one
    /// row of whitespace-separated 0-based indices per line.
    pub fn from_cayley_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty Cayley file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad order: {e}")))?;
        if n == 0 {
            return Err(Error::BadParameter("group order must be at least 1".into()));
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let tok = tokens
                    .next()
                    .ok_or_else(|| Error::Parse(format!("missing entry ({i},{j})")))?;
                row.push(
                    tok.parse()
                        .map_err(|e| Error::Parse(format!("bad entry ({i},{j}) `{tok}`: {e}")))?,
                );
            }
            rows.push(row);
        }
        if tokens.next().is_some() {
            return Err(Error::Parse("trailing data after the table".into()));
        }
        Self::from_table(&rows)
    }

    pub fn to_cayley_text(&self) -> String {
        let mut out = format!("{}\n", self.order);
        for a in 0..self.order {
            let row: Vec<String> = self.row(a).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn commutator_subgroup(&self) -> Vec<usize> {
        let mut comms = BTreeSet::new();
        for x in 0..self.order {
            for y in 0..self.order {
                let c = self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y));
                comms.insert(c);
            }
        }
        comms.remove(&0);
        let gens: Vec<usize> = comms.into_iter().collect();
        self.generated_subgroup(&gens)
    }

    pub fn involution_count(&self) -> usize {
        (0..self.order).filter(|&x| self.mul(x, x) == 0).count()
    }

    /// Product of all elements in index order.
    pub fn product_of_all(&self) -> usize {
        (0..self.order).fold(0, |acc, x| self.mul(acc, x))
    }

    /// A Sylow 2-subgroup, grown greedily from the trivial subgroup.
    ///
    /// A 2-subgroup that is not Sylow is properly contained in its normaliser
    /// inside some Sylow subgroup, so some 2-element extends it; trying every
    /// 2-element therefore never gets stuck below full 2-power order.
    pub fn sylow2_subgroup(&self) -> Vec<usize> {
        let target = 1usize << self.order.trailing_zeros();
        let two_elements: Vec<usize> = (1..self.order)
            .filter(|&x| self.element_order(x).is_power_of_two())
            .collect();
        let mut gens: Vec<usize> = Vec::new();
        let mut h = vec![0usize];
        while h.len() < target {
            let mut grown = false;
            for &g in &two_elements {
                if h.binary_search(&g).is_ok() {
                    continue;
                }
                gens.push(g);
                let cand = self.generated_subgroup(&gens);
                if cand.len().is_power_of_two() {
                    h = cand;
                    grown = true;
                    break;
                }
                gens.pop();
            }
            assert!(grown, "no 2-element extends a non-Sylow 2-subgroup");
        }
        h
    }

    pub fn invariants(&self) -> GroupInvariants {
        let n = self.order;
        let commutator_subgroup = self.commutator_subgroup();
        let involution_count = self.involution_count();
        let prod = self.product_of_all();
        let product_condition = commutator_subgroup.binary_search(&prod).is_ok();
        let sylow = self.sylow2_subgroup();
        let sylow_cyclic = sylow.iter().any(|&x| self.element_order(x) == sylow.len());
        let sylow_condition = sylow.len() == 1 || !sylow_cyclic;
        GroupInvariants {
            order: n,
            abelianization_order: n / commutator_subgroup.len(),
            commutator_subgroup,
            involution_count,
            involution_fraction: Ratio::new(involution_count as u64, n as u64),
            product_condition,
            sylow_condition,
            sylow2_order: sylow.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupInvariants {
    pub order: usize,
    pub commutator_subgroup: Vec<usize>,
    pub abelianization_order: usize,
    /// Number of `x` with `x^2 = 1`, identity included.
    pub involution_count: usize,
    #[serde(serialize_with = "crate::report::ser_ratio_u64")]
    pub involution_fraction: Ratio<u64>,
    /// Product of all elements lies in the commutator subgroup.
    pub product_condition: bool,
    /// Sylow 2-subgroups are trivial or noncyclic.
    pub sylow_condition: bool,
    pub sylow2_order: usize,
}

impl GroupInvariants {
    pub fn hall_paige(&self) -> bool {
        self.product_condition
    }

    pub fn inv_fraction_f64(&self) -> f64 {
        *self.involution_fraction.numer() as f64 / *self.involution_fraction.denom() as f64
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::BadParameter("group order must be at least 1".into()));
    }
    if n > MAX_NAMED_ORDER {
        return Err(Error::BadParameter(format!(
            "group order {n} exceeds {MAX_NAMED_ORDER}"
        )));
    }
    Ok(())
}

fn check_latin(table: &[Vec<usize>]) -> Result<()> {
    let n = table.len();
    let mut seen = vec![usize::MAX; n];
    for (i, row) in table.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if seen[v] == i {
                return Err(Error::NotLatin(format!("row {i} repeats {v} (column {j})")));
            }
            seen[v] = i;
        }
    }
    seen.fill(usize::MAX);
    for j in 0..n {
        for (i, row) in table.iter().enumerate() {
            let v = row[j];
            if seen[v] == j {
                return Err(Error::NotLatin(format!("column {j} repeats {v} (row {i})")));
            }
            seen[v] = j;
        }
    }
    Ok(())
}

/// Light's associativity test. The elements `g` with `(xg)y = x(gy)` for all
/// `x, y` form a submagma, so checking a generating set suffices.
fn find_nonassociative(n: usize, t: &[u32]) -> Option<(usize, usize, usize)> {
    let mul = |a: usize, b: usize| t[a * n + b] as usize;
    let mut in_closure = vec![false; n];
    let mut closure: Vec<usize> = Vec::new();
    let mut gens = Vec::new();
    while closure.len() < n {
        let g = (0..n).find(|&x| !in_closure[x]).unwrap();
        gens.push(g);
        in_closure[g] = true;
        closure.push(g);
        let mut i = 0;
        while i < closure.len() {
            let a = closure[i];
            let mut j = 0;
            while j <= i {
                let b = closure[j];
                for p in [mul(a, b), mul(b, a)] {
                    if !in_closure[p] {
                        in_closure[p] = true;
                        closure.push(p);
                    }
                }
                j += 1;
            }
            i += 1;
        }
    }
    for &g in &gens {
        for x in 0..n {
            let xg = mul(x, g);
            for y in 0..n {
                if mul(xg, y) != mul(x, mul(g, y)) {
                    return Some((x, g, y));
                }
            }
        }
    }
    None
}

/// Descriptor for the built-in group constructors.
///
/// Text form: `trivial`, `cyclic:n`, `elementary_abelian:p,k`,
/// `dihedral:n` (order `n`), `quaternion`, `symmetric:k`, `alternating:k`,
/// and products joined with `*`, e.g. `cyclic:3*cyclic:3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Trivial,
    Cyclic(usize),
    ElementaryAbelian { p: usize, k: usize },
    Dihedral(usize),
    Quaternion,
    Symmetric(usize),
    Alternating(usize),
    Product(Vec<GroupSpec>),
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Trivial => write!(f, "trivial"),
            GroupSpec::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupSpec::ElementaryAbelian { p, k } => write!(f, "elementary_abelian:{p},{k}"),
            GroupSpec::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupSpec::Quaternion => write!(f, "quaternion"),
            GroupSpec::Symmetric(k) => write!(f, "symmetric:{k}"),
            GroupSpec::Alternating(k) => write!(f, "alternating:{k}"),
            GroupSpec::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::BadParameter(format!("{what}: `{s}` is not a nonnegative integer")))
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('*') {
            let parts = s
                .split('*')
                .map(str::parse)
                .collect::<Result<Vec<GroupSpec>>>()?;
            return Ok(GroupSpec::Product(parts));
        }
        let (name, params) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        let need = |p: Option<&'_ str>| -> Result<String> {
            p.map(str::to_string)
                .ok_or_else(|| Error::BadParameter(format!("`{name}` needs a parameter")))
        };
        match name {
            "trivial" => Ok(GroupSpec::Trivial),
            "cyclic" | "C" => Ok(GroupSpec::Cyclic(parse_usize(
                &need(params)?,
                "cyclic order",
            )?)),
            "elementary_abelian" => {
                let p = need(params)?;
                let (a, b) = p
                    .split_once(',')
                    .ok_or_else(|| Error::BadParameter("elementary_abelian needs `p,k`".into()))?;
                Ok(GroupSpec::ElementaryAbelian {
                    p: parse_usize(a, "prime")?,
                    k: parse_usize(b, "rank")?,
                })
            }
            "dihedral" | "D" => Ok(GroupSpec::Dihedral(parse_usize(
                &need(params)?,
                "dihedral order",
            )?)),
            "quaternion" | "Q8" => match params {
                None => Ok(GroupSpec::Quaternion),
                Some(p) if parse_usize(p, "quaternion order")? == 8 => Ok(GroupSpec::Quaternion),
                Some(p) => Err(Error::BadParameter(format!(
                    "quaternion order {p} (only 8)"
                ))),
            },
            "symmetric" | "S" => Ok(GroupSpec::Symmetric(parse_usize(&need(params)?, "degree")?)),
            "alternating" | "A" => Ok(GroupSpec::Alternating(parse_usize(
                &need(params)?,
                "degree",
            )?)),
            other => Err(Error::UnknownConstructor(other.to_string())),
        }
    }
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        let name = self.to_string();
        match *self {
            GroupSpec::Trivial => Ok(FiniteGroup::trivial()),
            GroupSpec::Cyclic(n) => FiniteGroup::cyclic(n),
            GroupSpec::ElementaryAbelian { p, k } => {
                if p < 2 || !(2..p).all(|d| p % d != 0) {
                    return Err(Error::BadParameter(format!("{p} is not prime")));
                }
                let n = p
                    .checked_pow(k as u32)
                    .filter(|&n| n <= MAX_NAMED_ORDER)
                    .ok_or_else(|| Error::BadParameter(format!("{p}^{k} is too large")))?;
                Ok(FiniteGroup::from_fn(n, name, |mut a, mut b| {
                    let (mut out, mut place) = (0, 1);
                    for _ in 0..k {
                        out += ((a % p + b % p) % p) * place;
                        a /= p;
                        b /= p;
                        place *= p;
                    }
                    out
                }))
            }
            GroupSpec::Dihedral(n) => {
                check_order(n)?;
                if n % 2 != 0 {
                    return Err(Error::BadParameter(format!(
                        "dihedral order {n} must be even"
                    )));
                }
                let k = n / 2;
                // r^i s^j has index i + k*j; s r s = r^-1
                Ok(FiniteGroup::from_fn(n, name, |a, b| {
                    let (i, j) = (a % k, a / k);
                    let (c, d) = (b % k, b / k);
                    let rot = if j == 0 { (i + c) % k } else { (i + k - c) % k };
                    rot + k * ((j + d) % 2)
                }))
            }
            GroupSpec::Quaternion => Ok(quaternion_group()),
            GroupSpec::Symmetric(k) => permutation_group(k, false, name),
            GroupSpec::Alternating(k) => permutation_group(k, true, name),
            GroupSpec::Product(ref parts) => {
                let mut acc = FiniteGroup::trivial();
                for p in parts {
                    acc = direct_product(&acc, &p.build()?)?;
                }
                Ok(acc.with_name(name))
            }
        }
    }
}

pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Result<FiniteGroup> {
    let (na, nb) = (a.order(), b.order());
    let n = na
        .checked_mul(nb)
        .filter(|&n| n <= MAX_NAMED_ORDER)
        .ok_or_else(|| Error::BadParameter("direct product is too large".into()))?;
    let name = format!("{}*{}", a.name(), b.name());
    Ok(FiniteGroup::from_fn(n, name, |x, y| {
        a.mul(x % na, y % na) + na * b.mul(x / na, y / na)
    }))
}

fn quaternion_group() -> FiniteGroup {
    // index = unit + 4*sign, units 1,i,j,k; sign 0 is +
    // unit products: (sign flip, unit)
    const UNIT: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    FiniteGroup::from_fn(8, "quaternion".into(), |a, b| {
        let (ua, sa) = (a % 4, a / 4);
        let (ub, sb) = (b % 4, b / 4);
        let (flip, u) = UNIT[ua][ub];
        u + 4 * ((sa + sb + flip) % 2)
    })
}

fn permutation_group(k: usize, even_only: bool, name: String) -> Result<FiniteGroup> {
    if k == 0 || k > 7 {
        return Err(Error::BadParameter(format!("degree {k} must be in 1..=7")));
    }
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        if !even_only || is_even(&cur) {
            perms.push(cur.clone());
        }
        if !next_permutation(&mut cur) {
            break;
        }
    }
    let index: HashMap<Vec<usize>, usize> = perms
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let n = perms.len();
    Ok(FiniteGroup::from_fn(n, name, |a, b| {
        // (a*b)(x) = a(b(x))
        let prod: Vec<usize> = (0..k).map(|x| perms[a][perms[b][x]]).collect();
        index[&prod]
    }))
}

fn is_even(p: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// Lexicographic successor; returns false after the last permutation.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
