//! Arithmetic in F_p, vectors of F_p^n and the point-index codec.
//!
//! A point of F_p^n is addressed by a [`PointIndex`]: the little-endian
//! base-p number whose digit `i` is coordinate `x_i`. Axis `i` therefore
//! has stride `p^i` in every dense table indexed by points.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// A residue mod p. Every supported prime fits in 32 bits.
pub type Residue = u32;

/// Largest number of points an [`AmbientSpace`] may hold by default.
pub const DEFAULT_POINT_BUDGET: u64 = 1 << 26;

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n == w {
            return true;
        }
        if n.is_multiple_of(w) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero residue, by Fermat.
pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// `F_p^n` for a prime `p`, together with its point count `p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct AmbientSpace {
    p: u64,
    n: usize,
    point_count: u64,
}

impl AmbientSpace {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        Self::with_budget(p, n, DEFAULT_POINT_BUDGET)
    }

    /// Builds the space, refusing when `p^n` exceeds `budget` points.
    pub fn with_budget(p: u64, n: usize, budget: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let point_count = u32::try_from(n)
            .ok()
            .and_then(|e| p.checked_pow(e))
            .filter(|&c| c <= budget)
            .ok_or_else(|| Error::BudgetExceeded {
                what: "ambient space",
                required: format!("{p}^{n}"),
                budget,
            })?;
        if p > u64::from(Residue::MAX) {
            return Err(invalid(format!("prime {p} does not fit a 32-bit residue")));
        }
        Ok(AmbientSpace { p, n, point_count })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn point_count(&self) -> u64 {
        self.point_count
    }

    /// `p^k` for `k <= n`; fits because `p^n` does.
    pub fn pow(&self, k: usize) -> u64 {
        assert!(k <= self.n, "exponent {k} exceeds dimension {}", self.n);
        self.p.pow(k as u32)
    }

    /// Distance between consecutive indices along `axis`.
    pub fn stride(&self, axis: usize) -> u64 {
        self.pow(axis)
    }

    /// Validates raw coordinates into a vector of this space.
    pub fn vector(&self, coords: &[u64]) -> Result<FpVector> {
        if coords.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: coords.len(),
            });
        }
        let mut out = Vec::with_capacity(self.n);
        for (position, &value) in coords.iter().enumerate() {
            if value >= self.p {
                return Err(Error::CoordinateOutOfRange {
                    position,
                    value,
                    p: self.p,
                });
            }
            out.push(value as Residue);
        }
        Ok(FpVector(out))
    }

    pub fn zero(&self) -> FpVector {
        FpVector(vec![0; self.n])
    }

    pub fn check(&self, v: &FpVector) -> Result<()> {
        if v.0.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.0.len(),
            });
        }
        match v.0.iter().position(|&c| u64::from(c) >= self.p) {
            Some(position) => Err(Error::CoordinateOutOfRange {
                position,
                value: u64::from(v.0[position]),
                p: self.p,
            }),
            None => Ok(()),
        }
    }

    pub fn encode(&self, v: &FpVector) -> Result<PointIndex> {
        self.check(v)?;
        Ok(self.encode_unchecked(v.coords()))
    }

    pub(crate) fn encode_unchecked(&self, coords: &[Residue]) -> PointIndex {
        let idx = coords
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p + u64::from(c));
        PointIndex(idx)
    }

    /// Inverse of [`encode`](Self::encode). Panics when `idx` is out of range.
    pub fn decode(&self, idx: PointIndex) -> FpVector {
        let mut out = vec![0; self.n];
        self.decode_into(idx, &mut out);
        FpVector(out)
    }

    pub(crate) fn decode_into(&self, idx: PointIndex, out: &mut [Residue]) {
        assert!(idx.0 < self.point_count, "point index {} out of range", idx.0);
        let mut rest = idx.0;
        for c in out.iter_mut() {
            *c = (rest % self.p) as Residue;
            rest /= self.p;
        }
    }

    pub fn dot(&self, u: &FpVector, v: &FpVector) -> Result<Residue> {
        self.check(u)?;
        self.check(v)?;
        Ok(dot_raw(u.coords(), v.coords(), self.p))
    }

    pub fn add(&self, u: &FpVector, v: &FpVector) -> Result<FpVector> {
        self.check(u)?;
        self.check(v)?;
        Ok(FpVector(
            u.0.iter()
                .zip(&v.0)
                .map(|(&a, &b)| ((u64::from(a) + u64::from(b)) % self.p) as Residue)
                .collect(),
        ))
    }

    pub fn sub(&self, u: &FpVector, v: &FpVector) -> Result<FpVector> {
        self.check(u)?;
        self.check(v)?;
        Ok(FpVector(
            u.0.iter()
                .zip(&v.0)
                .map(|(&a, &b)| ((u64::from(a) + self.p - u64::from(b)) % self.p) as Residue)
                .collect(),
        ))
    }

    pub fn neg(&self, v: &FpVector) -> FpVector {
        FpVector(
            v.0.iter()
                .map(|&a| ((self.p - u64::from(a)) % self.p) as Residue)
                .collect(),
        )
    }

    /// Every point of the space, in index order.
    pub fn points(&self) -> impl Iterator<Item = FpVector> + '_ {
        (0..self.point_count).map(move |i| self.decode(PointIndex(i)))
    }
}

impl fmt::Display for AmbientSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.n)
    }
}

pub(crate) fn dot_raw(u: &[Residue], v: &[Residue], p: u64) -> Residue {
    let s = u
        .iter()
        .zip(v)
        .fold(0u64, |acc, (&a, &b)| (acc + u64::from(a) * u64::from(b)) % p);
    s as Residue
}

/// A vector of F_p^n. Coordinates are validated against a space on entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FpVector(Vec<Residue>);

impl FpVector {
    pub fn coords(&self) -> &[Residue] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub(crate) fn from_raw(coords: Vec<Residue>) -> Self {
        FpVector(coords)
    }
}

impl fmt::Display for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Index of a point in `[0, p^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PointIndex(pub u64);

impl PointIndex {
    pub fn get(self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(67_108_859));
        assert!(!is_prime(67_108_861 * 3));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn rejects_composite_and_oversized() {
        assert!(matches!(AmbientSpace::new(4, 2), Err(Error::NotPrime(4))));
        assert!(matches!(AmbientSpace::new(1, 2), Err(Error::NotPrime(1))));
        assert!(matches!(AmbientSpace::new(3, 0), Err(Error::ZeroDimension)));
        assert!(matches!(
            AmbientSpace::new(2, 27),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(AmbientSpace::new(2, 26).is_ok());
        assert!(AmbientSpace::with_budget(5, 3, 100).is_err());
    }

    #[test]
    fn encode_examples() {
        let s = AmbientSpace::new(3, 2).unwrap();
        assert_eq!(s.encode(&s.vector(&[0, 0]).unwrap()).unwrap(), PointIndex(0));
        assert_eq!(s.encode(&s.vector(&[2, 1]).unwrap()).unwrap(), PointIndex(5));
        let s1 = AmbientSpace::new(5, 1).unwrap();
        assert_eq!(s1.encode(&s1.vector(&[4]).unwrap()).unwrap(), PointIndex(4));
    }

    #[test]
    fn out_of_range_coordinate() {
        let s = AmbientSpace::new(3, 2).unwrap();
        assert!(matches!(
            s.vector(&[3, 0]),
            Err(Error::CoordinateOutOfRange { position: 0, .. })
        ));
        assert!(matches!(
            s.vector(&[1]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        let foreign = FpVector::from_raw(vec![1, 7]);
        assert!(s.encode(&foreign).is_err());
    }

    #[test]
    fn codec_is_bijective_exhaustively() {
        for &(p, n) in &[(2, 5), (3, 4), (5, 3), (7, 2), (101, 2)] {
            let s = AmbientSpace::new(p, n).unwrap();
            for i in 0..s.point_count() {
                let v = s.decode(PointIndex(i));
                assert_eq!(s.encode(&v).unwrap(), PointIndex(i));
            }
        }
    }

    #[test]
    fn dot_examples() {
        let s = AmbientSpace::new(5, 2).unwrap();
        let u = s.vector(&[1, 2]).unwrap();
        assert_eq!(s.dot(&u, &s.vector(&[3, 4]).unwrap()).unwrap(), 1);
        assert_eq!(s.dot(&u, &s.zero()).unwrap(), 0);
        let s2 = AmbientSpace::new(2, 2).unwrap();
        let w = s2.vector(&[1, 1]).unwrap();
        assert_eq!(s2.dot(&w, &w).unwrap(), 0);
        let s3 = AmbientSpace::new(5, 3).unwrap();
        assert!(s.dot(&u, &s3.zero()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn space_and_vectors() -> impl Strategy<Value = (u64, Vec<u64>, Vec<u64>, Vec<u64>)> {
            (prop_oneof![Just(2u64), Just(3), Just(7), Just(31), Just(8191)], 1usize..5)
                .prop_flat_map(|(p, n)| {
                    let v = proptest::collection::vec(0..p, n);
                    (Just(p), v.clone(), v.clone(), v)
                })
        }

        proptest! {
            #[test]
            fn codec_roundtrip_random(p in prop_oneof![Just(2u64), Just(13), Just(8191)],
                                      raw in proptest::collection::vec(any::<u64>(), 1..3)) {
                let s = AmbientSpace::new(p, raw.len()).unwrap();
                let coords: Vec<u64> = raw.iter().map(|c| c % p).collect();
                let v = s.vector(&coords).unwrap();
                prop_assert_eq!(s.decode(s.encode(&v).unwrap()), v);
            }

            #[test]
            fn dot_is_additive((p, u, v, w) in space_and_vectors()) {
                let s = AmbientSpace::with_budget(p, u.len(), u64::MAX).unwrap();
                let (u, v, w) = (s.vector(&u).unwrap(), s.vector(&v).unwrap(), s.vector(&w).unwrap());
                let lhs = s.dot(&u, &s.add(&v, &w).unwrap()).unwrap();
                let rhs = (u64::from(s.dot(&u, &v).unwrap()) + u64::from(s.dot(&u, &w).unwrap())) % p;
                prop_assert_eq!(u64::from(lhs), rhs);
                prop_assert_eq!(s.dot(&u, &v).unwrap(), s.dot(&v, &u).unwrap());
            }
        }
    }
}
