//! Linear subspaces and affine planes of F_p^n.
//!
//! A [`Subspace`] is stored as the reduced row echelon basis of its row
//! space, which is unique, so structural equality is subspace equality.
//! An [`AffinePlane`] is a coset `x + W` whose representative has zeros in
//! the pivot columns of `W`; that representative is unique per coset.

mod enumerate;
mod gauss;

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_bigint::BigUint;

use crate::error::{invalid, Error, Result};
use crate::field::{dot_raw, inv_mod, AmbientSpace, FpVector, Residue};

pub use enumerate::{
    affine_planes, affine_planes_with_budget, grassmannian, grassmannian_with_budget,
    pivot_patterns, AffinePlanes, Grassmannian, DEFAULT_SUBSPACE_BUDGET,
};
pub use gauss::{
    check_range_condition, gaussian_binomial, gaussian_binomial_or_zero, gaussian_division,
    verify_pascal_identities, GaussCount,
};

/// Reduces `rows` (each of length `n`) to RREF in place and drops zero rows.
/// Returns the pivot columns.
pub(crate) fn rref(rows: &mut Vec<Vec<Residue>>, p: u64) -> Vec<usize> {
    let n = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(found) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, found);
        let inv = inv_mod(u64::from(rows[r][col]), p);
        for c in rows[r].iter_mut() {
            *c = ((u64::from(*c) * inv) % p) as Residue;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let factor = u64::from(row[col]);
            for (c, &q) in row.iter_mut().zip(&pivot_row) {
                *c = ((u64::from(*c) + (p - factor) * u64::from(q)) % p) as Residue;
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// A linear subspace in canonical RREF form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    space: AmbientSpace,
    /// `dim` rows of length `n`, concatenated.
    basis: Vec<Residue>,
    pivots: Vec<usize>,
}

impl Subspace {
    /// The span of arbitrary (possibly dependent) vectors.
    pub fn span(space: AmbientSpace, vectors: &[FpVector]) -> Result<Self> {
        let mut rows = Vec::with_capacity(vectors.len());
        for v in vectors {
            space.check(v)?;
            rows.push(v.coords().to_vec());
        }
        Ok(Self::from_rows(space, rows))
    }

    pub(crate) fn from_rows(space: AmbientSpace, mut rows: Vec<Vec<Residue>>) -> Self {
        let pivots = rref(&mut rows, space.p());
        Subspace {
            space,
            basis: rows.concat(),
            pivots,
        }
    }

    /// Builds directly from a matrix already known to be in RREF.
    pub(crate) fn from_rref_unchecked(space: AmbientSpace, basis: Vec<Residue>, pivots: Vec<usize>) -> Self {
        debug_assert_eq!(basis.len(), pivots.len() * space.n());
        Subspace {
            space,
            basis,
            pivots,
        }
    }

    pub fn zero(space: AmbientSpace) -> Self {
        Subspace {
            space,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(space: AmbientSpace) -> Self {
        let n = space.n();
        let mut basis = vec![0; n * n];
        for i in 0..n {
            basis[i * n + i] = 1;
        }
        Subspace {
            space,
            basis,
            pivots: (0..n).collect(),
        }
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn codim(&self) -> usize {
        self.space.n() - self.dim()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[Residue]> {
        // chunks_exact panics on 0; n >= 1 always holds.
        self.basis.chunks_exact(self.space.n())
    }

    pub fn basis_vectors(&self) -> Vec<FpVector> {
        self.rows().map(|r| FpVector::from_raw(r.to_vec())).collect()
    }

    /// Number of elements, `p^dim`.
    pub fn size(&self) -> u64 {
        self.space.pow(self.dim())
    }

    /// Subtracts the basis so that pivot coordinates become zero. The result
    /// is the canonical representative of `x + self`.
    pub(crate) fn reduce_in_place(&self, x: &mut [Residue]) {
        let p = self.space.p();
        for (row, &piv) in self.rows().zip(&self.pivots) {
            let factor = u64::from(x[piv]);
            if factor == 0 {
                continue;
            }
            for (c, &q) in x.iter_mut().zip(row) {
                *c = ((u64::from(*c) + (p - factor) * u64::from(q)) % p) as Residue;
            }
        }
    }

    pub fn reduce(&self, x: &FpVector) -> Result<FpVector> {
        self.space.check(x)?;
        let mut out = x.coords().to_vec();
        self.reduce_in_place(&mut out);
        Ok(FpVector::from_raw(out))
    }

    pub fn contains(&self, x: &FpVector) -> bool {
        self.reduce(x).map(|r| r.is_zero()).unwrap_or(false)
    }

    /// `Per(W) = {x : x . w = 0 for all w in W}`, the nullspace of the basis.
    pub fn perp(&self) -> Subspace {
        let n = self.space.n();
        let p = self.space.p();
        let mut is_pivot = vec![false; n];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        let rows: Vec<Vec<Residue>> = (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![0; n];
                v[f] = 1;
                for (row, &piv) in self.rows().zip(&self.pivots) {
                    v[piv] = ((p - u64::from(row[f])) % p) as Residue;
                }
                v
            })
            .collect();
        if rows.is_empty() {
            return Subspace::zero(self.space);
        }
        Subspace::from_rows(self.space, rows)
    }

    /// Every element of the subspace, as coefficient combinations of the basis
    /// in little-endian base-p order.
    pub fn elements(&self) -> impl Iterator<Item = FpVector> + '_ {
        let p = self.space.p();
        let n = self.space.n();
        let dim = self.dim();
        (0..self.size()).map(move |mut k| {
            let mut v = vec![0u64; n];
            for row in 0..dim {
                let coeff = k % p;
                k /= p;
                if coeff != 0 {
                    for (c, &q) in v.iter_mut().zip(&self.basis[row * n..(row + 1) * n]) {
                        *c = (*c + coeff * u64::from(q)) % p;
                    }
                }
            }
            FpVector::from_raw(v.into_iter().map(|c| c as Residue).collect())
        })
    }

    /// Whether every vector of `self` is orthogonal to every vector of `other`.
    pub fn is_orthogonal_to(&self, other: &Subspace) -> bool {
        let p = self.space.p();
        self.rows()
            .all(|a| other.rows().all(|b| dot_raw(a, b, p) == 0))
    }

    /// `subspace p=<p> n=<n> m=<m>` followed by the RREF rows.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "subspace p={} n={} m={}",
            self.space.p(),
            self.space.n(),
            self.dim()
        )?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("ascii output")
    }

    /// Reads one serialized subspace. Rows must already be in RREF.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: "<subspace>".into(),
            line,
            message,
        };
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| err(1, "missing header".into()))??;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("subspace") {
            return Err(err(1, format!("bad header {header:?}")));
        }
        let (mut p, mut n, mut m) = (None, None, None);
        for tok in toks {
            match tok.split_once('=') {
                Some(("p", v)) => p = v.parse::<u64>().ok(),
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("m", v)) => m = v.parse::<usize>().ok(),
                _ => return Err(err(1, format!("unexpected field {tok:?}"))),
            }
        }
        let (Some(p), Some(n), Some(m)) = (p, n, m) else {
            return Err(err(1, "header needs p=, n= and m=".into()));
        };
        let space = AmbientSpace::new(p, n).map_err(|e| err(1, e.to_string()))?;
        let mut rows = Vec::with_capacity(m);
        for (i, line) in lines.take(m).enumerate() {
            let line = line?;
            let coords: std::result::Result<Vec<u64>, _> =
                line.trim().split(',').map(|t| t.trim().parse::<u64>()).collect();
            let coords = coords.map_err(|e| err(i + 2, e.to_string()))?;
            let v = space.vector(&coords).map_err(|e| err(i + 2, e.to_string()))?;
            rows.push(v.coords().to_vec());
        }
        if rows.len() != m {
            return Err(err(rows.len() + 2, format!("expected {m} rows")));
        }
        let given = rows.concat();
        let sub = Subspace::from_rows(space, rows);
        if sub.dim() != m || sub.basis != given {
            return Err(err(2, "rows are not a reduced row echelon basis".into()));
        }
        Ok(sub)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("span{")?;
        for (i, row) in self.basis_vectors().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{row}")?;
        }
        f.write_str("}")
    }
}

/// A coset `rep + direction`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffinePlane {
    direction: Arc<Subspace>,
    rep: FpVector,
}

impl AffinePlane {
    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    pub fn direction_arc(&self) -> &Arc<Subspace> {
        &self.direction
    }

    /// Canonical representative: zero in every pivot column of the direction.
    pub fn rep(&self) -> &FpVector {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn contains(&self, x: &FpVector) -> bool {
        self.direction.reduce(x).is_ok_and(|r| r == self.rep)
    }

    pub fn points(&self) -> impl Iterator<Item = FpVector> + '_ {
        let space = *self.direction.space();
        self.direction
            .elements()
            .map(move |w| space.add(&self.rep, &w).expect("same space"))
    }

    pub(crate) fn from_parts(direction: Arc<Subspace>, rep: Vec<Residue>) -> Self {
        AffinePlane {
            direction,
            rep: FpVector::from_raw(rep),
        }
    }
}

impl fmt::Display for AffinePlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}", self.rep, self.direction)
    }
}

/// The coset of `w` through `x`.
pub fn coset_of(w: &Arc<Subspace>, x: &FpVector) -> Result<AffinePlane> {
    Ok(AffinePlane {
        rep: w.reduce(x)?,
        direction: Arc::clone(w),
    })
}

fn require_nonzero(space: &AmbientSpace, xi: &FpVector) -> Result<()> {
    space.check(xi)?;
    if xi.is_zero() {
        return Err(invalid("the vector must be nonzero"));
    }
    Ok(())
}

/// `|{V in G(n,m) : xi in V}| = {n-1 choose m-1}_p`.
pub fn count_subspaces_containing(space: &AmbientSpace, xi: &FpVector, m: usize) -> Result<BigUint> {
    require_nonzero(space, xi)?;
    if m > space.n() {
        return Err(invalid(format!("subspace dimension {m} exceeds {}", space.n())));
    }
    let n = space.n() as i64;
    Ok(gaussian_binomial_or_zero(n - 1, m as i64 - 1, space.p()))
}

/// `|{V in G(n,m) : xi in Per(V)}| = {n-1 choose m}_p`.
pub fn count_subspaces_with_perp_containing(
    space: &AmbientSpace,
    xi: &FpVector,
    m: usize,
) -> Result<BigUint> {
    require_nonzero(space, xi)?;
    if m > space.n() {
        return Err(invalid(format!("subspace dimension {m} exceeds {}", space.n())));
    }
    let n = space.n() as i64;
    Ok(gaussian_binomial_or_zero(n - 1, m as i64, space.p()))
}

/// Both counts above, recomputed by walking G(n,m).
pub fn count_subspaces_exhaustive(space: &AmbientSpace, xi: &FpVector, m: usize) -> Result<(u64, u64)> {
    require_nonzero(space, xi)?;
    let mut containing = 0;
    let mut perp_containing = 0;
    for v in grassmannian(*space, m)? {
        if v.contains(xi) {
            containing += 1;
        }
        if v.perp().contains(xi) {
            perp_containing += 1;
        }
    }
    Ok((containing, perp_containing))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u64, n: usize) -> AmbientSpace {
        AmbientSpace::new(p, n).unwrap()
    }

    fn span(s: AmbientSpace, vs: &[&[u64]]) -> Subspace {
        let vs: Vec<FpVector> = vs.iter().map(|v| s.vector(v).unwrap()).collect();
        Subspace::span(s, &vs).unwrap()
    }

    #[test]
    fn span_is_canonical() {
        let s = space(5, 3);
        let a = span(s, &[&[1, 2, 3], &[0, 1, 1]]);
        assert_eq!(a.dim(), 2);
        assert_eq!(a, span(s, &[&[1, 3, 4], &[0, 2, 2]]));
        assert_eq!(a, span(s, &[&[1, 3, 4], &[0, 2, 2], &[2, 1, 3]]));
        assert_eq!(a.pivots(), &[0, 1]);
        let z = span(s, &[&[0, 0, 0]]);
        assert_eq!(z, Subspace::zero(s));
    }

    #[test]
    fn perp_examples() {
        let s2 = space(2, 2);
        let w = span(s2, &[&[1, 1]]);
        assert_eq!(w.perp(), w);
        let s3 = space(3, 2);
        assert_eq!(Subspace::full(s3).perp(), Subspace::zero(s3));
        assert_eq!(Subspace::zero(s3).perp(), Subspace::full(s3));
        let w = span(s3, &[&[1, 0]]);
        // brute force: all x with x . (1,0) = 0
        let brute: Vec<FpVector> = s3
            .points()
            .filter(|x| s3.dot(x, &s3.vector(&[1, 0]).unwrap()).unwrap() == 0)
            .collect();
        assert_eq!(brute.len(), 3);
        assert_eq!(w.perp(), Subspace::span(s3, &brute).unwrap());
        assert_eq!(w.perp(), span(s3, &[&[0, 1]]));
    }

    #[test]
    fn coset_examples() {
        let s = space(3, 2);
        let w = Arc::new(span(s, &[&[1, 0]]));
        let a = coset_of(&w, &s.vector(&[2, 1]).unwrap()).unwrap();
        let b = coset_of(&w, &s.vector(&[0, 1]).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rep(), &s.vector(&[0, 1]).unwrap());
        let inside = coset_of(&w, &s.vector(&[2, 0]).unwrap()).unwrap();
        assert!(inside.rep().is_zero());
        let zero = Arc::new(Subspace::zero(s));
        let singletons: std::collections::HashSet<_> =
            s.points().map(|x| coset_of(&zero, &x).unwrap()).collect();
        assert_eq!(singletons.len(), 9);
    }

    #[test]
    fn coset_count_and_membership() {
        let s = space(3, 3);
        for w in grassmannian(s, 1).unwrap() {
            let w = Arc::new(w);
            let cosets: std::collections::HashSet<_> =
                s.points().map(|x| coset_of(&w, &x).unwrap()).collect();
            assert_eq!(cosets.len(), 9);
            for x in s.points().step_by(5) {
                for y in s.points().step_by(7) {
                    let same = coset_of(&w, &x).unwrap() == coset_of(&w, &y).unwrap();
                    assert_eq!(same, w.contains(&s.sub(&x, &y).unwrap()));
                }
            }
        }
    }

    #[test]
    fn containment_count_examples() {
        let s = space(3, 2);
        let xi = s.vector(&[1, 0]).unwrap();
        assert_eq!(count_subspaces_containing(&s, &xi, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(count_subspaces_exhaustive(&s, &xi, 1).unwrap(), (1, 1));
        for xi in s.points().filter(|x| !x.is_zero()) {
            assert_eq!(
                count_subspaces_with_perp_containing(&s, &xi, 1).unwrap(),
                BigUint::from(1u32)
            );
        }
        let s = space(2, 3);
        let xi = s.vector(&[1, 0, 0]).unwrap();
        assert_eq!(count_subspaces_containing(&s, &xi, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(count_subspaces_exhaustive(&s, &xi, 2).unwrap().0, 3);
        assert!(count_subspaces_containing(&s, &s.zero(), 1).is_err());
    }

    #[test]
    fn elements_enumerate_the_subspace() {
        let s = space(3, 3);
        let w = span(s, &[&[1, 2, 0], &[0, 1, 1]]);
        let els: std::collections::HashSet<_> = w.elements().collect();
        assert_eq!(els.len(), 9);
        assert!(els.iter().all(|x| w.contains(x)));
    }

    #[test]
    fn serialization_roundtrip() {
        let s = space(5, 4);
        for w in grassmannian(s, 2).unwrap().step_by(17) {
            let text = w.to_text();
            assert!(text.starts_with("subspace p=5 n=4 m=2\n"));
            assert_eq!(Subspace::read_from(text.as_bytes()).unwrap(), w);
        }
        let z = Subspace::zero(s);
        assert_eq!(Subspace::read_from(z.to_text().as_bytes()).unwrap(), z);
        assert!(Subspace::read_from("subspace p=5 n=2 m=1\n2,1\n".as_bytes()).is_err());
    }
}
