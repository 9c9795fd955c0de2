//! Exact physical-side computations on `G^n` for very small `n`: the
//! argument projections of the indicator of bijections, the two routes to
//! the truncated triple convolution, and the sparse mass bound.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::counting::TargetFunction;
use crate::error::{Error, Result};
use crate::gamma::{natural_embedding, GammaEngine};
use crate::group::FiniteGroup;
use crate::partition::{all_partitions, full_support_partitions, Partition};
use crate::rational::{bijection_density, falling, pow_i, to_f64};
use crate::system::{canonical_form_limited, PartitionSystem};

/// Largest `n` for dense cube computations (`6^6 = 46656` entries).
pub const DEFAULT_CUBE_LIMIT: usize = 6;

/// A function on `G^n` that depends only on the coordinates in `coords`,
/// stored densely over those coordinates as `nums / n^den_exp`.
///
/// Index `sum_j x[coords[j]] n^j` holds the value at `x`. Averages use the
/// normalized measure, so `<F, H> = n^-n sum F H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeFunction {
    n: usize,
    coords: Vec<usize>,
    den_exp: u32,
    nums: Vec<i128>,
}

fn check_cube(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::BudgetExceeded {
            what: "dense functions on G^n",
            cost: (n as f64).powi(n as i32),
            budget: (limit as f64).powi(limit as i32),
        });
    }
    Ok(())
}

fn overflow() -> Error {
    Error::BudgetExceeded {
        what: "i128 numerator range",
        cost: f64::INFINITY,
        budget: i128::MAX as f64,
    }
}

/// Digits of `idx` in base `n`, least significant first.
fn digits(mut idx: usize, n: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let d = idx % n;
            idx /= n;
            d
        })
        .collect()
}

impl CubeFunction {
    pub fn constant(n: usize, num: i128, den_exp: u32) -> Self {
        CubeFunction {
            n,
            coords: Vec::new(),
            den_exp,
            nums: vec![num],
        }
    }

    /// Integer-valued function of the coordinates `coords` (0-based).
    pub fn from_fn(n: usize, coords: &[usize], f: impl Fn(&[usize]) -> i128) -> Self {
        let mut coords = coords.to_vec();
        coords.sort_unstable();
        coords.dedup();
        let k = coords.len();
        let nums = (0..n.pow(k as u32)).map(|i| f(&digits(i, n, k))).collect();
        CubeFunction {
            n,
            coords,
            den_exp: 0,
            nums,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coordinates the stored table ranges over.
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    fn pos(&self, point: &[usize]) -> usize {
        self.coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.n + point[c])
    }

    /// Value at a full point of `G^n`.
    pub fn value_at(&self, point: &[usize]) -> BigRational {
        BigRational::new(
            BigInt::from(self.nums[self.pos(point)]),
            num_traits::pow(BigInt::from(self.n), self.den_exp as usize),
        )
    }

    pub fn sum_of_values(&self) -> BigRational {
        let total: BigInt = self.nums.iter().map(|&v| BigInt::from(v)).sum();
        let k = self.coords.len();
        BigRational::new(
            total * num_traits::pow(BigInt::from(self.n), self.n - k),
            num_traits::pow(BigInt::from(self.n), self.den_exp as usize),
        )
    }

    /// Divides out common factors of `n` between numerators and the
    /// denominator.
    fn reduced(mut self) -> Self {
        let n = self.n as i128;
        while self.den_exp > 0 && n > 1 && self.nums.iter().all(|v| v % n == 0) {
            for v in &mut self.nums {
                *v /= n;
            }
            self.den_exp -= 1;
        }
        self
    }

    fn with_den_exp(&self, den_exp: u32) -> Result<Self> {
        let factor = (self.n as i128)
            .checked_pow(den_exp - self.den_exp)
            .ok_or_else(overflow)?;
        let nums = self
            .nums
            .iter()
            .map(|v| v.checked_mul(factor).ok_or_else(overflow))
            .collect::<Result<_>>()?;
        Ok(CubeFunction {
            n: self.n,
            coords: self.coords.clone(),
            den_exp,
            nums,
        })
    }

    /// The same function tabulated over a superset of its coordinates.
    pub fn lift(&self, coords: &[usize]) -> Result<Self> {
        let mut target = coords.to_vec();
        target.sort_unstable();
        target.dedup();
        if self.coords.iter().any(|c| target.binary_search(c).is_err()) {
            return Err(Error::NotSubset);
        }
        let k = target.len();
        let mut point = vec![0usize; self.n];
        let nums = (0..self.n.pow(k as u32))
            .map(|i| {
                for (j, d) in digits(i, self.n, k).into_iter().enumerate() {
                    point[target[j]] = d;
                }
                self.nums[self.pos(&point)]
            })
            .collect();
        Ok(CubeFunction {
            n: self.n,
            coords: target,
            den_exp: self.den_exp,
            nums,
        })
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        let mut coords: Vec<usize> = self.coords.iter().chain(&other.coords).copied().collect();
        coords.sort_unstable();
        coords.dedup();
        let den = self.den_exp.max(other.den_exp);
        Ok((
            self.lift(&coords)?.with_den_exp(den)?,
            other.lift(&coords)?.with_den_exp(den)?,
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, i128::checked_add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, i128::checked_sub)
    }

    fn combine(&self, other: &Self, op: fn(i128, i128) -> Option<i128>) -> Result<Self> {
        let (mut a, b) = self.aligned(other)?;
        for (x, y) in a.nums.iter_mut().zip(&b.nums) {
            *x = op(*x, *y).ok_or_else(overflow)?;
        }
        Ok(a.reduced())
    }

    pub fn scale(&self, k: i128) -> Result<Self> {
        let mut out = self.clone();
        for v in &mut out.nums {
            *v = v.checked_mul(k).ok_or_else(overflow)?;
        }
        Ok(out.reduced())
    }

    /// Exact equality as functions on `G^n`.
    pub fn same_function(&self, other: &Self) -> Result<bool> {
        let (a, b) = self.aligned(other)?;
        Ok(a.nums == b.nums)
    }

    /// `E_i`: averages out coordinate `i` (0-based).
    pub fn average(&self, i: usize) -> Self {
        let Ok(j) = self.coords.binary_search(&i) else {
            return self.clone();
        };
        let n = self.n;
        let stride = n.pow(j as u32);
        let outer = self.nums.len() / (stride * n);
        let mut nums = Vec::with_capacity(self.nums.len() / n);
        for hi in 0..outer {
            for lo in 0..stride {
                let base = hi * stride * n + lo;
                nums.push((0..n).map(|d| self.nums[base + d * stride]).sum());
            }
        }
        let mut coords = self.coords.clone();
        coords.remove(j);
        CubeFunction {
            n,
            coords,
            den_exp: self.den_exp + 1,
            nums,
        }
        .reduced()
    }

    /// `Q_Y`: averages out every coordinate outside `y`.
    pub fn project_q(&self, y: &[usize]) -> Self {
        let drop: Vec<usize> = self
            .coords
            .iter()
            .copied()
            .filter(|c| !y.contains(c))
            .collect();
        drop.into_iter().fold(self.clone(), |acc, c| acc.average(c))
    }

    /// `P_X = sum_{Y ⊆ X} (-1)^{|X|-|Y|} Q_Y`.
    pub fn project_p(&self, x: &[usize]) -> Result<Self> {
        let mut x = x.to_vec();
        x.sort_unstable();
        x.dedup();
        let base = self.project_q(&x);
        let mut acc = CubeFunction::constant(self.n, 0, 0).lift(&x)?;
        for mask in 0u32..1 << x.len() {
            let y: Vec<usize> = (0..x.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| x[i])
                .collect();
            let q = base.project_q(&y).lift(&x)?;
            acc = if (x.len() - y.len()).is_multiple_of(2) {
                acc.add(&q)?
            } else {
                acc.sub(&q)?
            };
        }
        Ok(acc)
    }

    /// Normalized inner product `n^-n sum F H` (real-valued functions).
    pub fn inner(&self, other: &Self) -> Result<BigRational> {
        let (a, b) = self.aligned(other)?;
        let mut total = BigInt::zero();
        for (x, y) in a.nums.iter().zip(&b.nums) {
            total += BigInt::from(*x) * BigInt::from(*y);
        }
        let k = a.coords.len();
        Ok(BigRational::new(
            total,
            num_traits::pow(BigInt::from(self.n), k + 2 * a.den_exp as usize),
        ))
    }

    fn max_abs(&self) -> i128 {
        self.nums.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Normalized convolution `(F * H)(x) = n^-n sum_y F(y) H(y^-1 x)`,
    /// computed over the union of the coordinates involved.
    pub fn convolve(&self, g: &FiniteGroup, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let k = a.coords.len();
        let n = self.n;
        let size = n.pow(k as u32);
        (a.max_abs().max(1))
            .checked_mul(b.max_abs().max(1))
            .and_then(|v| v.checked_mul(size as i128))
            .ok_or_else(overflow)?;
        let mut nums = vec![0i128; size];
        for (ia, &va) in a.nums.iter().enumerate() {
            if va == 0 {
                continue;
            }
            let da = digits(ia, n, k);
            for (ib, &vb) in b.nums.iter().enumerate() {
                if vb == 0 {
                    continue;
                }
                let db = digits(ib, n, k);
                let idx = (0..k).rev().fold(0, |acc, j| acc * n + g.mul(da[j], db[j]));
                nums[idx] += va * vb;
            }
        }
        Ok(CubeFunction {
            n,
            coords: a.coords,
            den_exp: 2 * a.den_exp + k as u32,
            nums,
        }
        .reduced())
    }
}

/// `(A * B * C)(f)` for functions on the same coordinates, without forming
/// the full triple convolution: `n^-2k sum_a A(a) (B*C)(a^-1 f)`.
pub fn triple_convolution_at(
    g: &FiniteGroup,
    parts: [&CubeFunction; 3],
    point: &[usize],
) -> Result<BigRational> {
    let [a, b, c] = parts;
    if a.coords != b.coords || b.coords != c.coords {
        return Err(Error::BadParameter(
            "triple convolution needs equal coordinates".into(),
        ));
    }
    let n = a.n;
    let k = a.coords.len();
    let size = n.pow(k as u32);
    let bound = (a.max_abs().max(1) as f64)
        * (b.max_abs().max(1) as f64)
        * (c.max_abs().max(1) as f64)
        * (size as f64)
        * (size as f64);
    if bound >= i128::MAX as f64 / 4.0 {
        return Err(overflow());
    }
    let weights: Vec<usize> = (0..k).map(|j| n.pow(j as u32)).collect();
    // (B*C)(t) unnormalized: for each b, add B(b) C(c) at index of b c
    let bc_row = |ib: usize| -> Vec<i128> {
        let mut out = vec![0i128; size];
        let vb = b.nums[ib];
        if vb == 0 {
            return out;
        }
        let db = digits(ib, n, k);
        let contrib: Vec<Vec<usize>> = (0..k)
            .map(|j| (0..n).map(|v| g.mul(db[j], v) * weights[j]).collect())
            .collect();
        let mut dc = vec![0usize; k];
        let mut idx: usize = contrib.iter().map(|row| row[0]).sum();
        for &vc in &c.nums {
            out[idx] += vb * vc;
            // advance the odometer over c, updating the product index
            let mut j = 0;
            while j < k {
                idx -= contrib[j][dc[j]];
                dc[j] += 1;
                if dc[j] < n {
                    idx += contrib[j][dc[j]];
                    break;
                }
                dc[j] = 0;
                idx += contrib[j][0];
                j += 1;
            }
        }
        out
    };
    let sum_rows = |mut acc: Vec<i128>, row: Vec<i128>| {
        for (x, y) in acc.iter_mut().zip(row) {
            *x += y;
        }
        acc
    };
    #[cfg(feature = "parallel")]
    let bc: Vec<i128> = {
        use rayon::prelude::*;
        (0..size)
            .into_par_iter()
            .fold(|| vec![0i128; size], |acc, ib| sum_rows(acc, bc_row(ib)))
            .reduce(|| vec![0i128; size], sum_rows)
    };
    #[cfg(not(feature = "parallel"))]
    let bc: Vec<i128> = (0..size).fold(vec![0i128; size], |acc, ib| sum_rows(acc, bc_row(ib)));

    let target: Vec<usize> = a.coords.iter().map(|&i| point[i]).collect();
    let mut total = BigInt::zero();
    for (ia, &va) in a.nums.iter().enumerate() {
        if va == 0 {
            continue;
        }
        let da = digits(ia, n, k);
        let t = (0..k)
            .rev()
            .fold(0, |acc, j| acc * n + g.mul(g.inv(da[j]), target[j]));
        total += BigInt::from(va) * BigInt::from(bc[t]);
    }
    let den = a.den_exp as usize + b.den_exp as usize + c.den_exp as usize + 2 * k;
    Ok(BigRational::new(
        total,
        num_traits::pow(BigInt::from(n), den),
    ))
}

/// `1_S` for the set `S` of bijections `{0..n} -> G`.
pub fn indicator_s(g: &FiniteGroup) -> Result<CubeFunction> {
    indicator_s_limited(g, DEFAULT_CUBE_LIMIT)
}

pub fn indicator_s_limited(g: &FiniteGroup, limit: usize) -> Result<CubeFunction> {
    let n = g.order();
    check_cube(n, limit)?;
    let all: Vec<usize> = (0..n).collect();
    Ok(CubeFunction::from_fn(n, &all, |x| {
        let mut seen = 0u64;
        for &v in x {
            if seen >> v & 1 == 1 {
                return 0;
            }
            seen |= 1 << v;
        }
        1
    }))
}

/// `Q_Y 1_S` for every `Y ⊆ {0..n}`, keyed by bitmask, each obtained from a
/// larger one by averaging a single coordinate.
fn all_q_projections(one_s: &CubeFunction) -> Vec<CubeFunction> {
    let n = one_s.n;
    let full = (1usize << n) - 1;
    let mut out: Vec<Option<CubeFunction>> = vec![None; 1 << n];
    out[full] = Some(one_s.clone());
    for mask in (0..full).rev() {
        let i = (0..n).find(|&i| mask >> i & 1 == 0).unwrap();
        let parent = out[mask | 1 << i].as_ref().unwrap();
        out[mask] = Some(parent.average(i));
    }
    out.into_iter().map(Option::unwrap).collect()
}

fn mask_coords(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// `P_X 1_S` for every `X`, keyed by bitmask.
pub fn all_p_projections(g: &FiniteGroup) -> Result<Vec<CubeFunction>> {
    let one_s = indicator_s(g)?;
    let n = g.order();
    let q = all_q_projections(&one_s);
    (0..1usize << n)
        .map(|x| {
            let xc = mask_coords(x, n);
            let mut acc = CubeFunction::constant(n, 0, 0).lift(&xc)?;
            let mut y = x;
            loop {
                let term = q[y].lift(&xc)?;
                let odd = (x.count_ones() - y.count_ones()) % 2 == 1;
                acc = if odd {
                    acc.sub(&term)?
                } else {
                    acc.add(&term)?
                };
                if y == 0 {
                    break;
                }
                y = (y - 1) & x;
            }
            Ok(acc)
        })
        .collect()
}

/// `sum_{|X| <= m} (P_X 1_S)^{*3}(f)`.
pub fn m_route_physical(g: &FiniteGroup, f: &TargetFunction, m: usize) -> Result<BigRational> {
    Ok(m_route_physical_by_size(g, f)?
        .into_iter()
        .take(m + 1)
        .sum())
}

/// Contributions of `|X| = 0, 1, ..., n` to the physical route.
pub fn m_route_physical_by_size(g: &FiniteGroup, f: &TargetFunction) -> Result<Vec<BigRational>> {
    f.check_group(g)?;
    let n = g.order();
    let p = all_p_projections(g)?;
    let mut by_size = vec![BigRational::zero(); n + 1];
    for (x, px) in p.iter().enumerate() {
        by_size[x.count_ones() as usize] += triple_convolution_at(g, [px, px, px], f.values())?;
    }
    Ok(by_size)
}

/// Every triple of full-support partitions of each `X ⊆ {1..n}` with
/// `2 <= |X| <= m`, as labelled systems.
pub fn labelled_systems(n: usize, m: usize) -> Vec<PartitionSystem> {
    let mut out = Vec::new();
    for x in 0usize..1 << n {
        let k = x.count_ones() as usize;
        if k < 2 || k > m {
            continue;
        }
        let labels: Vec<usize> = (0..n).filter(|&i| x >> i & 1 == 1).map(|i| i + 1).collect();
        let parts: Vec<Partition> = full_support_partitions(k)
            .into_iter()
            .map(|p| p.relabel(|l| labels[l - 1]))
            .collect();
        for a in &parts {
            for b in &parts {
                for c in &parts {
                    out.push(PartitionSystem::new(a.clone(), b.clone(), c.clone()));
                }
            }
        }
    }
    out
}

/// `(n!/n^n)^3 sum (n^s/(n)_s)^3 mu gamma n^-s zval^cx` over labelled
/// systems with support `s <= m`, the empty system included.
pub fn m_route_partitions(
    g: &FiniteGroup,
    f: &TargetFunction,
    m: usize,
    zval: &BigRational,
) -> Result<BigRational> {
    f.check_group(g)?;
    let n = g.order();
    check_cube(n, DEFAULT_CUBE_LIMIT)?;
    let engine = GammaEngine::new(g);
    let mut whole: HashMap<Vec<u8>, BigRational> = HashMap::new();
    let mut gamma_of = |s: &PartitionSystem| -> Result<BigRational> {
        if !f.is_identity() {
            return engine.gamma(s, f, &natural_embedding);
        }
        let code = canonical_form_limited(s, 16)?.code;
        if let Some(v) = whole.get(&code) {
            return Ok(v.clone());
        }
        let v = engine.gamma(s, f, &natural_embedding)?;
        whole.insert(code, v.clone());
        Ok(v)
    };
    let mut total = BigRational::one();
    for s in labelled_systems(n, m) {
        let gamma = gamma_of(&s)?;
        if gamma.is_zero() {
            continue;
        }
        let size = s.support_size();
        let ratio = BigRational::new(num_traits::pow(BigInt::from(n), size), falling(n, size));
        let cx = s.complexity();
        let z = num_traits::pow(zval.clone(), cx as usize);
        total += num_traits::pow(ratio, 3)
            * BigRational::from_integer(BigInt::from(s.mobius()))
            * gamma
            * pow_i(n, -(size as i64))
            * z;
    }
    Ok(total * num_traits::pow(bijection_density(n), 3))
}

/// `s(t) = sqrt t - (1 - t) ln(1 + sqrt t) - t ln sqrt t`.
pub fn sparse_exponent(t: f64) -> f64 {
    let r = t.sqrt();
    let last = if t == 0.0 { 0.0 } else { t * r.ln() };
    r - (1.0 - t) * r.ln_1p() - last
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsevalCheck {
    pub m: usize,
    /// `sum_{|X| = m} <P_X 1_S, P_X 1_S>`.
    pub lhs: BigRational,
    /// `(1 - sqrt(m/n))^-1 e^{s(m/n) n} (n!/n^n)^2`; infinite at `m = n`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn sparseval_check(g: &FiniteGroup, m: usize) -> Result<SparsevalCheck> {
    Ok(sparseval_all(g)?.swap_remove(m))
}

/// The check for every `m = 0..=n`.
pub fn sparseval_all(g: &FiniteGroup) -> Result<Vec<SparsevalCheck>> {
    let n = g.order();
    let p = all_p_projections(g)?;
    let mut lhs = vec![BigRational::zero(); n + 1];
    for (x, px) in p.iter().enumerate() {
        lhs[x.count_ones() as usize] += px.inner(px)?;
    }
    let density = to_f64(&bijection_density(n));
    Ok(lhs
        .into_iter()
        .enumerate()
        .map(|(m, lhs)| {
            let t = m as f64 / n as f64;
            let rhs = if m == n {
                f64::INFINITY
            } else {
                (1.0 - t.sqrt()).recip() * (sparse_exponent(t) * n as f64).exp() * density * density
            };
            let holds = to_f64(&lhs) <= rhs * (1.0 + 1e-12);
            SparsevalCheck { m, lhs, rhs, holds }
        })
        .collect())
}

/// Checks `1[h injective] = sum_P mu(P) c_P(h)` for every `h: X -> G` with
/// `|X| = k`, the sum running over all partitions of `X`. Returns the
/// number of functions checked.
pub fn mobius_inversion_check(g: &FiniteGroup, k: usize) -> Result<u64> {
    let n = g.order();
    let base: Vec<usize> = (1..=k).collect();
    let parts = all_partitions(&base);
    let mut checked = 0u64;
    for idx in 0..n.pow(k as u32) {
        let h = digits(idx, n, k);
        let injective = {
            let mut v = h.clone();
            v.sort_unstable();
            v.dedup();
            v.len() == k
        };
        let sum: i128 = parts
            .iter()
            .filter(|p| {
                p.cells()
                    .iter()
                    .all(|c| c.iter().all(|&x| h[x - 1] == h[c[0] - 1]))
            })
            .map(Partition::mobius)
            .sum();
        if sum != injective as i128 {
            return Err(Error::BadParameter(format!(
                "inversion fails at {h:?}: sum {sum}, indicator {injective}"
            )));
        }
        checked += 1;
    }
    Ok(checked)
}
