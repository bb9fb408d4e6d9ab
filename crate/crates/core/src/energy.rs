//! Energy `sum_{P in family} |E ∩ P|^2` over families of affine planes.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{AmbientSpace, Residue};
use crate::fourier::{dft, spectral_coset_energy, TOLERANCE};
use crate::pointset::PointSet;
use crate::projections::CosetLabeler;
use crate::subspaces::{
    affine_planes_with_budget, check_range_condition, gaussian_binomial, grassmannian_with_budget, AffinePlane,
    Subspace, DEFAULT_SUBSPACE_BUDGET,
};

/// A finite family of affine planes of one dimension in one space.
#[derive(Debug, Clone)]
pub struct PlaneFamily {
    space: AmbientSpace,
    dim: usize,
    planes: Vec<AffinePlane>,
}

/// Every coset of `w`, representatives zero at the pivot columns.
fn cosets(w: &Arc<Subspace>) -> impl Iterator<Item = AffinePlane> + '_ {
    let space = *w.space();
    let free: Vec<usize> = (0..space.n()).filter(|c| !w.pivots().contains(c)).collect();
    let count = space.pow(free.len());
    (0..count).map(move |mut k| {
        let mut rep = vec![0; space.n()];
        for &c in &free {
            rep[c] = (k % space.p()) as Residue;
            k /= space.p();
        }
        AffinePlane::from_parts(Arc::clone(w), rep)
    })
}

impl PlaneFamily {
    pub fn new(space: AmbientSpace, dim: usize, planes: Vec<AffinePlane>) -> Result<Self> {
        let mut fam = PlaneFamily {
            space,
            dim,
            planes: Vec::with_capacity(planes.len()),
        };
        for plane in planes {
            fam.push(plane)?;
        }
        Ok(fam)
    }

    pub fn push(&mut self, plane: AffinePlane) -> Result<()> {
        if plane.direction().space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        if plane.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: plane.dim(),
            });
        }
        self.planes.push(plane);
        Ok(())
    }

    /// `A(n, m)`, all `m`-dimensional planes.
    pub fn all(space: AmbientSpace, m: usize) -> Result<Self> {
        Self::all_with_budget(space, m, DEFAULT_SUBSPACE_BUDGET)
    }

    pub fn all_with_budget(space: AmbientSpace, m: usize, budget: u64) -> Result<Self> {
        Ok(PlaneFamily {
            space,
            dim: m,
            planes: affine_planes_with_budget(space, m, budget)?.collect(),
        })
    }

    /// All cosets of each given subspace.
    pub fn cosets_of(space: AmbientSpace, dim: usize, directions: &[Subspace]) -> Result<Self> {
        let mut fam = PlaneFamily {
            space,
            dim,
            planes: Vec::new(),
        };
        for w in directions {
            if w.space() != &space {
                return Err(Error::SpaceMismatch);
            }
            if w.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: w.dim(),
                });
            }
            fam.planes.extend(cosets(&Arc::new(w.clone())));
        }
        Ok(fam)
    }

    /// The lines `x + y = k` in `F_p^2`.
    pub fn sum_lines(space: AmbientSpace) -> Result<Self> {
        if space.n() != 2 {
            return Err(invalid("sum lines live in the plane"));
        }
        let dir = Subspace::span(space, &[space.vector(&[1, space.p() - 1])?])?;
        Self::cosets_of(space, 1, &[dir])
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn planes(&self) -> &[AffinePlane] {
        &self.planes
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }
}

/// `sum_{P in family} |E ∩ P|^2`, from one coset profile per run of planes
/// sharing a direction.
pub fn energy(e: &PointSet, family: &PlaneFamily) -> Result<u128> {
    if e.space() != family.space() {
        return Err(Error::SpaceMismatch);
    }
    let mut runs: Vec<&[AffinePlane]> = Vec::new();
    let mut start = 0;
    for i in 1..=family.planes.len() {
        if i == family.planes.len() || family.planes[i].direction() != family.planes[start].direction() {
            runs.push(&family.planes[start..i]);
            start = i;
        }
    }
    let total = runs
        .par_iter()
        .map(|run| {
            let labeler = CosetLabeler::new(run[0].direction());
            let counts = labeler.counts(e);
            run.iter()
                .map(|plane| {
                    let c = counts(labeler.label_raw(plane.rep().coords()));
                    u128::from(c) * u128::from(c)
                })
                .sum::<u128>()
        })
        .sum();
    Ok(total)
}

fn to_u128(v: BigUint) -> Result<u128> {
    v.to_u128().ok_or_else(|| invalid("count overflows 128 bits"))
}

/// `|E| p^m {n-1 choose m}_p + |E|^2 {n-1 choose m-1}_p`.
pub fn energy_closed_form(space: &AmbientSpace, size: u64, m: usize) -> Result<u128> {
    let (p, n) = (space.p(), space.n());
    if m == 0 || m > n {
        return Err(invalid(format!("plane dimension must lie in 1..={n}, got {m}")));
    }
    let a = to_u128(gaussian_binomial(n - 1, m, p).map_or(BigUint::ZERO, |g| g.into_inner()))?;
    let b = to_u128(gaussian_binomial(n - 1, m - 1, p)?.into_inner())?;
    let size = u128::from(size);
    Ok(size * u128::from(space.pow(m)) * a + size * size * b)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyIdentity {
    pub lhs: u128,
    pub rhs: u128,
    pub equal: bool,
}

/// The energy over `A(n, m)`, summed plane by plane, against the closed form.
pub fn verify_energy_identity(e: &PointSet, m: usize) -> Result<EnergyIdentity> {
    let rhs = energy_closed_form(e.space(), e.len(), m)?;
    let lhs = energy(e, &PlaneFamily::all(*e.space(), m)?)?;
    Ok(EnergyIdentity {
        lhs,
        rhs,
        equal: lhs == rhs,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralEnergyIdentity {
    /// `sum_{W in G(n,m)} p^{m-n} sum_{xi in Per(W)} |E^(xi)|^2`
    pub lhs: f64,
    /// The closed form.
    pub rhs: f64,
    /// `p^{m-n} ({n-1 choose m}_p sum_{xi != 0} |E^(xi)|^2 + {n choose m}_p |E|^2)`
    pub grouped: f64,
    pub max_abs_diff: f64,
    pub ok: bool,
}

/// The same energy computed from the spectrum.
pub fn verify_energy_identity_fourier(e: &PointSet, m: usize) -> Result<SpectralEnergyIdentity> {
    let space = *e.space();
    let (p, n) = (space.p(), space.n());
    let rhs = energy_closed_form(&space, e.len(), m)? as f64;
    let spec = dft(e)?;
    let mut lhs = 0.0;
    for w in grassmannian_with_budget(space, m, DEFAULT_SUBSPACE_BUDGET)? {
        lhs += spectral_coset_energy(&spec, &w)?;
    }
    let zero = spec.values()[0].norm_sqr();
    let rest: f64 = spec.values()[1..].iter().map(|v| v.norm_sqr()).sum();
    let g = |a, b| gaussian_binomial(a, b, p).map_or(0.0, |c| c.value().to_f64().unwrap_or(f64::INFINITY));
    let grouped = (g(n - 1, m) * rest + g(n, m) * zero) / space.pow(n - m) as f64;
    let max_abs_diff = (lhs - rhs).abs().max((grouped - rhs).abs());
    Ok(SpectralEnergyIdentity {
        lhs,
        rhs,
        grouped,
        max_abs_diff,
        ok: max_abs_diff <= TOLERANCE * rhs.max(1.0),
    })
}

/// `#{(a, b, a', b') in A x B x A x B : a + b = a' + b'}`.
pub fn additive_energy(a: &[Residue], b: &[Residue], p: u64) -> Result<u128> {
    let mut sums = vec![0u128; p as usize];
    let mut seen_a = vec![false; p as usize];
    let mut seen_b = vec![false; p as usize];
    for (set, seen) in [(a, &mut seen_a), (b, &mut seen_b)] {
        for &x in set {
            if u64::from(x) >= p {
                return Err(invalid(format!("{x} is not a residue mod {p}")));
            }
            seen[x as usize] = true;
        }
    }
    for (x, _) in seen_a.iter().enumerate().filter(|s| *s.1) {
        for (y, _) in seen_b.iter().enumerate().filter(|s| *s.1) {
            sums[(x + y) % p as usize] += 1;
        }
    }
    Ok(sums.iter().map(|c| c * c).sum())
}

/// `A x B` as a subset of `F_p^2`.
pub fn product_set(space: AmbientSpace, a: &[Residue], b: &[Residue]) -> Result<PointSet> {
    let mut pts = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            pts.push(space.vector(&[u64::from(x), u64::from(y)])?);
        }
    }
    PointSet::from_points(space, &pts)
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionEnergyBounds {
    pub energy: u128,
    /// `|E||Theta| + 2|E|^2 p^{(n-m-1)m}`
    pub bound_a: u128,
    /// `2|E| p^{(n-m)m} + |E|^2 |Theta| p^{-m}`, as `num / p^m`.
    pub bound_b_num: u128,
    pub bound_b_den: u128,
    pub bound_a_ok: bool,
    pub bound_b_ok: bool,
    /// Which bound is smaller: `"a"` or `"b"`.
    pub smaller: &'static str,
    /// The Gaussian-coefficient range condition at `(n, m)` and at
    /// `(n-1, m)`, the count the pair argument uses.
    pub range_condition: bool,
    pub ok: bool,
}

/// Energy of `E` over every coset of the directions `theta` (each of
/// dimension `n - m`) against both pair-counting bounds.
pub fn direction_energy_bounds(e: &PointSet, theta: &[Subspace], m: usize) -> Result<DirectionEnergyBounds> {
    let space = *e.space();
    let (p, n) = (space.p(), space.n());
    if m == 0 || m >= n {
        return Err(invalid(format!("codimension must lie in 1..{n}, got {m}")));
    }
    let family = PlaneFamily::cosets_of(space, n - m, theta)?;
    let energy = energy(e, &family)?;
    let size = u128::from(e.len());
    let t = theta.len() as u128;
    let pw = |k: usize| u128::from(p).pow(k as u32);
    let bound_a = size * t + 2 * size * size * pw((n - m - 1) * m);
    let bound_b_num = 2 * size * pw((n - m) * m + m) + size * size * t;
    let bound_b_den = pw(m);
    let bound_a_ok = energy <= bound_a;
    let bound_b_ok = energy * bound_b_den <= bound_b_num;
    let range_condition = check_range_condition(n, m, p) && check_range_condition(n - 1, m, p);
    Ok(DirectionEnergyBounds {
        energy,
        bound_a,
        bound_b_num,
        bound_b_den,
        bound_a_ok,
        bound_b_ok,
        smaller: if bound_a * bound_b_den <= bound_b_num { "a" } else { "b" },
        range_condition,
        ok: !range_condition || (bound_a_ok && bound_b_ok),
    })
}
