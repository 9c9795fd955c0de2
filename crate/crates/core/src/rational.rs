//! Small exact-arithmetic helpers shared across modules.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// Falling factorial `(n)_k = n (n-1) ... (n-k+1)`.
pub fn falling(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    falling(n, k) / BigInt::from(factorial(k))
}

/// `base^e` for a possibly negative exponent.
pub fn pow_i(base: usize, e: i64) -> BigRational {
    let b = BigInt::from(base);
    if e >= 0 {
        BigRational::from_integer(num_traits::pow(b, e as usize))
    } else {
        BigRational::new(BigInt::one(), num_traits::pow(b, (-e) as usize))
    }
}

/// `n! / n^n`.
pub fn bijection_density(n: usize) -> BigRational {
    BigRational::new(
        BigInt::from(factorial(n)),
        num_traits::pow(BigInt::from(n), n),
    )
}

/// Converts without overflow for values whose numerator and denominator
/// exceed the `f64` range separately.
pub fn to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64().filter(|v| v.is_finite() && *v != 0.0) {
        return v;
    }
    if r.is_zero() {
        return 0.0;
    }
    let shift = |x: &BigInt| x.bits() as i64 - 60;
    let (sn, sd) = (shift(r.numer()).max(0), shift(r.denom()).max(0));
    let n = (r.numer().abs() >> sn as usize).to_f64().unwrap();
    let d = (r.denom() >> sd as usize).to_f64().unwrap();
    let v = n / d * 2f64.powi((sn - sd) as i32);
    if r.is_negative() {
        -v
    } else {
        v
    }
}
