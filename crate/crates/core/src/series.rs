//! Truncated bivariate power series in `u` and `z` with exact coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    max_u: usize,
    max_z: usize,
    /// `c[i][j]` multiplies `u^i z^j`.
    c: Vec<Vec<BigRational>>,
}

impl BivariateSeries {
    pub fn zero(max_u: usize, max_z: usize) -> Self {
        BivariateSeries {
            max_u,
            max_z,
            c: vec![vec![BigRational::zero(); max_z + 1]; max_u + 1],
        }
    }

    pub fn one(max_u: usize, max_z: usize) -> Self {
        let mut s = Self::zero(max_u, max_z);
        s.c[0][0] = BigRational::one();
        s
    }

    pub fn monomial(max_u: usize, max_z: usize, i: usize, j: usize, coeff: BigRational) -> Self {
        let mut s = Self::zero(max_u, max_z);
        s.add_term(i, j, coeff);
        s
    }

    pub fn max_u_degree(&self) -> usize {
        self.max_u
    }

    pub fn max_z_degree(&self) -> usize {
        self.max_z
    }

    /// Adds `coeff u^i z^j`, dropping it if beyond the truncation.
    pub fn add_term(&mut self, i: usize, j: usize, coeff: BigRational) {
        if i <= self.max_u && j <= self.max_z {
            self.c[i][j] += coeff;
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> BigRational {
        if i <= self.max_u && j <= self.max_z {
            self.c[i][j].clone()
        } else {
            BigRational::zero()
        }
    }

    pub fn constant_term(&self) -> &BigRational {
        &self.c[0][0]
    }

    /// Nonzero `(i, j, c)` in order of `i` then `j`.
    pub fn terms(&self) -> Vec<(usize, usize, BigRational)> {
        let mut out = Vec::new();
        for (i, row) in self.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.push((i, j, v.clone()));
                }
            }
        }
        out
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if (self.max_u, self.max_z) != (other.max_u, other.max_z) {
            return Err(Error::BadParams(format!(
                "series truncations differ: ({}, {}) vs ({}, {})",
                self.max_u, self.max_z, other.max_u, other.max_z
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (i, row) in other.c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.c[i][j] += v;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        let mut out = self.clone();
        for row in &mut out.c {
            for v in row {
                *v *= k;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = Self::zero(self.max_u, self.max_z);
        for (i1, row1) in self.c.iter().enumerate() {
            for (j1, a) in row1.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..=self.max_u - i1 {
                    for j2 in 0..=self.max_z - j1 {
                        let b = &other.c[i2][j2];
                        if !b.is_zero() {
                            out.c[i1 + i2][j1 + j2] += a * b;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn require_no_constant(&self, what: &str) -> Result<()> {
        if !self.c[0][0].is_zero() {
            return Err(Error::BadParams(format!(
                "{what} needs a zero constant term"
            )));
        }
        Ok(())
    }

    /// Every monomial has positive total degree, so powers beyond
    /// `max_u + max_z` vanish.
    fn power_sum(&self, weight: impl Fn(usize) -> BigRational) -> Result<Self> {
        let mut acc = Self::one(self.max_u, self.max_z).scale(&weight(0));
        let mut power = Self::one(self.max_u, self.max_z);
        for k in 1..=self.max_u + self.max_z {
            power = power.mul(self)?;
            acc = acc.add(&power.scale(&weight(k)))?;
        }
        Ok(acc)
    }

    /// `exp(s)` for `s` with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        self.require_no_constant("exp")?;
        let mut fact = BigInt::one();
        let mut weights = vec![BigRational::one()];
        for k in 1..=self.max_u + self.max_z {
            fact *= k;
            weights.push(BigRational::new(BigInt::one(), fact.clone()));
        }
        self.power_sum(|k| weights[k].clone())
    }

    /// `log(1 + s)` for `s` with zero constant term.
    pub fn log1p(&self) -> Result<Self> {
        self.require_no_constant("log1p")?;
        self.power_sum(|k| match k {
            0 => BigRational::zero(),
            _ if k % 2 == 1 => BigRational::new(BigInt::one(), BigInt::from(k)),
            _ => BigRational::new(-BigInt::one(), BigInt::from(k)),
        })
    }

    /// `log(s)` for `s` with constant term 1.
    pub fn log(&self) -> Result<Self> {
        if !self.c[0][0].is_one() {
            return Err(Error::BadParams("log needs constant term 1".into()));
        }
        let mut shifted = self.clone();
        shifted.c[0][0] = BigRational::zero();
        shifted.log1p()
    }
}

impl fmt::Display for BivariateSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = terms
            .into_iter()
            .map(|(i, j, c)| {
                let mut s = format!("({c})");
                if i > 0 {
                    s.push_str(&format!(" u^{i}"));
                }
                if j > 0 {
                    s.push_str(&format!(" z^{j}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
