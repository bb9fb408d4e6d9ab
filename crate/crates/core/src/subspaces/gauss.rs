//! Gaussian binomial coefficients and the identities they satisfy.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};

/// Number of `m`-dimensional subspaces of an `n`-dimensional space over F_p.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussCount(BigUint);

impl GaussCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl fmt::Display for GaussCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for GaussCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl PartialEq<u64> for GaussCount {
    fn eq(&self, other: &u64) -> bool {
        self.0 == BigUint::from(*other)
    }
}

fn big_pow(p: u64, e: usize) -> BigUint {
    num_traits::pow(BigUint::from(p), e)
}

/// Numerator and denominator of the product formula
/// `prod_{i<m} (p^n - p^i) / prod_{i<m} (p^m - p^i)`.
fn product_formula(n: usize, m: usize, p: u64) -> (BigUint, BigUint) {
    let pn = big_pow(p, n);
    let pm = big_pow(p, m);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..m {
        let pi = big_pow(p, i);
        num *= &pn - &pi;
        den *= &pm - &pi;
    }
    (num, den)
}

/// Quotient and remainder of the product formula; the remainder is always zero.
pub fn gaussian_division(n: usize, m: usize, p: u64) -> Result<(BigUint, BigUint)> {
    check_args(n, m, p)?;
    let (num, den) = product_formula(n, m, p);
    Ok((&num / &den, num % den))
}

fn check_args(n: usize, m: usize, p: u64) -> Result<()> {
    if p < 2 {
        return Err(invalid(format!("field size {p} must be at least 2")));
    }
    if m > n {
        return Err(invalid(format!("subspace dimension {m} exceeds {n}")));
    }
    Ok(())
}

pub fn gaussian_binomial(n: usize, m: usize, p: u64) -> Result<GaussCount> {
    check_args(n, m, p)?;
    let (num, den) = product_formula(n, m, p);
    debug_assert!((&num % &den).is_zero());
    Ok(GaussCount(num / den))
}

/// Like [`gaussian_binomial`], with the convention that the count is zero
/// outside `0 <= m <= n`.
pub fn gaussian_binomial_or_zero(n: i64, m: i64, p: u64) -> BigUint {
    if n < 0 || m < 0 || m > n {
        return BigUint::zero();
    }
    gaussian_binomial(n as usize, m as usize, p)
        .map(GaussCount::into_inner)
        .unwrap_or_default()
}

/// `p^{m(n-m)} <= {n choose m}_p <= 2 p^{m(n-m)}`, compared exactly.
pub fn check_range_condition(n: usize, m: usize, p: u64) -> bool {
    let Ok(g) = gaussian_binomial(n, m, p) else {
        return false;
    };
    let base = big_pow(p, m * (n - m));
    base <= g.0 && g.0 <= base * 2u32
}

/// Symmetry and both Pascal-type recurrences at `(n, m)`, for `1 <= m <= n`.
pub fn verify_pascal_identities(n: usize, m: usize, p: u64) -> bool {
    if m == 0 || m > n || p < 2 {
        return false;
    }
    let g = |a: usize, b: usize| gaussian_binomial_or_zero(a as i64, b as i64, p);
    let whole = g(n, m);
    let symmetric = whole == g(n, n - m);
    let upper = whole == g(n - 1, m) + big_pow(p, n - m) * g(n - 1, m - 1);
    let lower = whole == g(n - 1, m - 1) + big_pow(p, m) * g(n - 1, m);
    symmetric && upper && lower
}
