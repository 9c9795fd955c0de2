//! The generating polynomials of full-support partitions weighted by
//! `|mu|`, and the cubed-product sums built from them.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::partition::full_support_partitions;
use crate::rational::{binomial, factorial};

pub const DEFAULT_DIRECT_LIMIT: usize = 9;

/// Integer Laurent polynomial `sum_k coeffs[k] t^(low + k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    low: i64,
    coeffs: Vec<BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly {
            low: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(c: i64, exp: i64) -> Self {
        LaurentPoly {
            low: exp,
            coeffs: vec![BigInt::from(c)],
        }
        .normalized()
    }

    pub fn from_coeffs(low: i64, coeffs: Vec<BigInt>) -> Self {
        LaurentPoly { low, coeffs }.normalized()
    }

    fn normalized(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        self.coeffs.drain(..lead);
        self.low = if self.coeffs.is_empty() {
            0
        } else {
            self.low + lead as i64
        };
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `t^exp`.
    pub fn coeff(&self, exp: i64) -> BigInt {
        let i = exp - self.low;
        if i < 0 {
            return BigInt::zero();
        }
        self.coeffs.get(i as usize).cloned().unwrap_or_default()
    }

    /// `(exponent, coefficient)` for the nonzero terms, lowest first.
    pub fn terms(&self) -> Vec<(i64, BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.low + i as i64, c.clone()))
            .collect()
    }

    pub fn min_degree(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.low)
    }

    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let low = self.low.min(other.low);
        let high = (self.low + self.coeffs.len() as i64).max(other.low + other.coeffs.len() as i64);
        let coeffs = (low..high)
            .map(|e| self.coeff(e) + other.coeff(e))
            .collect();
        Self::from_coeffs(low, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::from_coeffs(self.low + other.low, coeffs)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_coeffs(self.low, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn shift(&self, by: i64) -> Self {
        LaurentPoly {
            low: self.low + by,
            coeffs: self.coeffs.clone(),
        }
        .normalized()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .into_iter()
            .map(|(e, c)| match e {
                0 => c.to_string(),
                1 if c.is_one() => "t".to_string(),
                1 => format!("{c}t"),
                _ if c.is_one() => format!("t^{e}"),
                _ => format!("{c}t^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn check_direct(m: usize, limit: usize) -> Result<()> {
    if m > limit {
        return Err(Error::LimitExceeded {
            what: "size for direct partition enumeration",
            value: m as u64,
            limit: limit as u64,
        });
    }
    Ok(())
}

/// `sum over full-support partitions of {1..m} of |mu| t^cork`, by
/// enumeration.
pub fn alpha_poly_direct(m: usize, limit: usize) -> Result<LaurentPoly> {
    check_direct(m, limit)?;
    let mut acc = LaurentPoly::zero();
    for p in full_support_partitions(m) {
        acc = acc.add(&LaurentPoly::monomial(
            p.mobius().abs() as i64,
            p.cork() as i64,
        ));
    }
    Ok(acc)
}

/// The same polynomials by splitting off the cell containing the first
/// point: a cell of size `k` has `|mu| = (k-1)!` and cork `k - 1`.
pub fn alpha_table(max_m: usize) -> Vec<LaurentPoly> {
    let mut table: Vec<LaurentPoly> = vec![LaurentPoly::one()];
    for m in 1..=max_m {
        let mut acc = LaurentPoly::zero();
        for k in 2..=m {
            let w = binomial(m - 1, k - 1) * BigInt::from(factorial(k - 1));
            acc = acc.add(&table[m - k].scale(&w).shift(k as i64 - 1));
        }
        table.push(acc);
    }
    table
}

/// `alpha_m(t)`; enumeration up to [`DEFAULT_DIRECT_LIMIT`], the recurrence
/// beyond.
pub fn alpha_poly(m: usize) -> LaurentPoly {
    if m <= DEFAULT_DIRECT_LIMIT {
        alpha_poly_direct(m, DEFAULT_DIRECT_LIMIT).expect("within limit")
    } else {
        alpha_table(m).pop().unwrap()
    }
}

/// `sum over full-support partitions P of {1..m} of
/// t^(cork P - 2m) prod_cells alpha_|p|(t)^3`, by enumeration.
pub fn beta_poly_direct(m: usize, limit: usize) -> Result<LaurentPoly> {
    check_direct(m, limit)?;
    let alphas = alpha_table(m);
    let cubes: Vec<LaurentPoly> = alphas.iter().map(|a| a.mul(a).mul(a)).collect();
    let mut acc = LaurentPoly::zero();
    for p in full_support_partitions(m) {
        let mut term = LaurentPoly::monomial(1, p.cork() as i64 - 2 * m as i64);
        for c in p.cells() {
            term = term.mul(&cubes[c.len()]);
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Recurrence form of [`beta_poly_direct`]: each cell of size `k` weighs
/// `t^(k-1) alpha_k^3`, and the whole sum carries `t^(-2m)`.
pub fn beta_poly(m: usize) -> LaurentPoly {
    let alphas = alpha_table(m);
    let weight: Vec<LaurentPoly> = alphas
        .iter()
        .enumerate()
        .map(|(k, a)| a.mul(a).mul(a).shift(k as i64 - 1))
        .collect();
    let mut b: Vec<LaurentPoly> = vec![LaurentPoly::one()];
    for i in 1..=m {
        let mut acc = LaurentPoly::zero();
        for k in 2..=i {
            acc = acc.add(&b[i - k].mul(&weight[k]).scale(&binomial(i - 1, k - 1)));
        }
        b.push(acc);
    }
    b[m].shift(-2 * m as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(i64, i64)]) -> LaurentPoly {
        terms.iter().fold(LaurentPoly::zero(), |acc, &(c, e)| {
            acc.add(&LaurentPoly::monomial(c, e))
        })
    }

    #[test]
    fn small_alphas() {
        assert!(alpha_poly(1).is_zero());
        assert_eq!(alpha_poly(2), poly(&[(1, 1)]));
        assert_eq!(alpha_poly(4), poly(&[(3, 2), (6, 3)]));
        assert_eq!(alpha_poly(4).to_string(), "3t^2 + 6t^3");
    }

    #[test]
    fn recurrence_matches_enumeration() {
        let table = alpha_table(9);
        for m in 0..=9 {
            assert_eq!(table[m], alpha_poly_direct(m, 9).unwrap(), "m = {m}");
        }
        for m in 0..=8 {
            assert_eq!(beta_poly(m), beta_poly_direct(m, 9).unwrap(), "m = {m}");
        }
        assert!(alpha_poly_direct(10, 9).is_err());
    }

    #[test]
    fn alpha_at_one_counts_weighted_partitions() {
        // alpha_4(1) = 9 while there are only 4 such partitions of a 4-set
        for m in 1..=7 {
            let parts = full_support_partitions(m);
            let weighted: i128 = parts.iter().map(|p| p.mobius().abs()).sum();
            assert_eq!(alpha_poly(m).eval_at_one(), BigInt::from(weighted));
        }
        assert_eq!(alpha_poly(4).eval_at_one(), BigInt::from(9));
        assert_eq!(full_support_partitions(4).len(), 4);
    }

    #[test]
    fn small_betas() {
        assert_eq!(beta_poly(0), LaurentPoly::one());
        assert_eq!(beta_poly(2), LaurentPoly::one());
        assert_eq!(beta_poly(3), poly(&[(8, 2)]));
    }

    #[test]
    fn laurent_arithmetic() {
        let a = poly(&[(1, -2), (3, 1)]);
        let b = poly(&[(2, 2)]);
        assert_eq!(a.mul(&b), poly(&[(2, 0), (6, 3)]));
        assert_eq!(a.add(&a.scale(&BigInt::from(-1))), LaurentPoly::zero());
        assert_eq!(a.coeff(-2), BigInt::from(1));
        assert_eq!(a.min_degree(), Some(-2));
        assert_eq!(a.to_string(), "t^-2 + 3t");
    }
}
