//! The transform `E^(xi) = sum_{x in E} e(-x . xi)`, `e(t) = exp(2 pi i t / p)`,
//! with the identities and decay measurements built on it.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{dot_raw, AmbientSpace, FpVector, PointIndex, Residue};
use crate::pointset::PointSet;
use crate::projections::{coset_profile, Directions};
use crate::subspaces::Subspace;

/// Relative tolerance for floating-point identities.
pub const TOLERANCE: f64 = 1e-9;

/// Largest `p^n` for which a full spectrum is computed.
pub const DEFAULT_SPECTRUM_BUDGET: u64 = 1 << 22;

/// `e(-j)` for `j in F_p`.
fn roots(p: u64) -> Vec<Complex64> {
    (0..p)
        .map(|j| {
            let (s, c) = (TAU * j as f64 / p as f64).sin_cos();
            Complex64::new(c, -s)
        })
        .collect()
}

/// All `p^n` Fourier coefficients of a point set, indexed like points.
#[derive(Debug, Clone)]
pub struct Spectrum {
    space: AmbientSpace,
    values: Vec<Complex64>,
    source_cardinality: u64,
}

pub fn dft(e: &PointSet) -> Result<Spectrum> {
    dft_with_budget(e, DEFAULT_SPECTRUM_BUDGET)
}

/// Transforms one axis at a time with naive length-`p` sums. Refuses spaces
/// larger than `budget`; use [`pointwise_coefficient`] there.
pub fn dft_with_budget(e: &PointSet, budget: u64) -> Result<Spectrum> {
    let space = *e.space();
    if space.point_count() > budget {
        return Err(Error::BudgetExceeded {
            what: "full spectrum (evaluate coefficients pointwise instead)",
            required: space.point_count().to_string(),
            budget,
        });
    }
    let p = space.p() as usize;
    let w = roots(space.p());
    let mut values: Vec<Complex64> = e
        .indicator()
        .into_iter()
        .map(|b| Complex64::new(f64::from(b), 0.0))
        .collect();
    for axis in 0..space.n() {
        let stride = space.stride(axis) as usize;
        values.par_chunks_mut(stride * p).for_each(|block| {
            let mut line = vec![Complex64::default(); p];
            let mut out = vec![Complex64::default(); p];
            for offset in 0..stride {
                for (x, slot) in line.iter_mut().enumerate() {
                    *slot = block[offset + x * stride];
                }
                for (xi, o) in out.iter_mut().enumerate() {
                    *o = line
                        .iter()
                        .enumerate()
                        .fold(Complex64::default(), |acc, (x, v)| acc + v * w[x * xi % p]);
                }
                for (xi, &o) in out.iter().enumerate() {
                    block[offset + xi * stride] = o;
                }
            }
        });
    }
    Ok(Spectrum {
        space,
        values,
        source_cardinality: e.len(),
    })
}

/// `E^(xi)` by direct summation over `E`.
pub fn pointwise_coefficient(e: &PointSet, xi: &FpVector) -> Result<Complex64> {
    let space = e.space();
    space.check(xi)?;
    let w = roots(space.p());
    let mut buf = vec![0; space.n()];
    let mut acc = Complex64::default();
    for idx in e.indices() {
        space.decode_into(idx, &mut buf);
        acc += w[dot_raw(&buf, xi.coords(), space.p()) as usize];
    }
    Ok(acc)
}

impl Spectrum {
    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn source_cardinality(&self) -> u64 {
        self.source_cardinality
    }

    pub fn value(&self, xi: PointIndex) -> Complex64 {
        self.values[xi.0 as usize]
    }

    pub fn at(&self, xi: &FpVector) -> Result<Complex64> {
        Ok(self.value(self.space.encode(xi)?))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest `|E^(xi)|` over `xi != 0`, with the first index attaining it.
    pub fn max_nonzero(&self) -> Option<(f64, PointIndex)> {
        self.values
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, v)| (v.norm(), PointIndex(i as u64)))
            .fold(None, |best, cur| match best {
                Some(b) if b.0 >= cur.0 => Some(b),
                _ => Some(cur),
            })
    }

    /// `xi, coordinates..., re, im, modulus`, one row per frequency.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.space.n();
        let coords: Vec<String> = (0..n).map(|i| format!("xi{i}")).collect();
        writeln!(w, "index,{},re,im,modulus", coords.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let xi = self.space.decode(PointIndex(i as u64));
            let c: Vec<String> = xi.coords().iter().map(|c| c.to_string()).collect();
            writeln!(w, "{i},{},{},{},{}", c.join(","), v.re, v.im, v.norm())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `sum_xi |E^(xi)|^2 = p^n |E|`.
pub fn plancherel_check(s: &Spectrum) -> IdentityCheck {
    let lhs: f64 = s.values.iter().map(|v| v.norm_sqr()).sum();
    let rhs = s.space.point_count() as f64 * s.source_cardinality as f64;
    IdentityCheck {
        lhs,
        rhs,
        ok: (lhs - rhs).abs() <= TOLERANCE * rhs.max(1.0),
    }
}

/// `p^{-m} sum_{xi in Per(W)} |E^(xi)|^2`, where `m` is the codimension of `W`.
pub fn spectral_coset_energy(s: &Spectrum, w: &Subspace) -> Result<f64> {
    if w.space() != &s.space {
        return Err(Error::SpaceMismatch);
    }
    let dual = w.perp();
    let sum: f64 = dual
        .elements()
        .map(|xi| s.value(s.space.encode_unchecked(xi.coords())).norm_sqr())
        .sum();
    Ok(sum / s.space.pow(w.codim()) as f64)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubspacePlancherel {
    pub combinatorial: u128,
    pub spectral: f64,
    pub ok: bool,
}

/// `sum_j |E ∩ (x_j + W)|^2` two ways: from coset counts and from the spectrum.
pub fn subspace_plancherel(e: &PointSet, w: &Subspace, s: &Spectrum) -> Result<SubspacePlancherel> {
    if e.space() != &s.space || s.source_cardinality != e.len() {
        return Err(invalid("spectrum does not belong to the point set"));
    }
    let combinatorial = coset_profile(e, w)?.sum_of_squares();
    let spectral = spectral_coset_energy(s, w)?;
    let c = combinatorial as f64;
    Ok(SubspacePlancherel {
        combinatorial,
        spectral,
        ok: (c - spectral).abs() <= TOLERANCE * c.max(1.0) && spectral.round() as u128 == combinatorial,
    })
}

/// `sum_{y in Per(V)} e(-x . y)`: `|Per(V)|` for `x in V`, zero otherwise.
pub fn character_sum(v: &Subspace, x: &FpVector) -> Result<Complex64> {
    let space = v.space();
    space.check(x)?;
    let w = roots(space.p());
    Ok(v.perp()
        .elements()
        .map(|y| w[dot_raw(x.coords(), y.coords(), space.p()) as usize])
        .sum())
}

/// `{(x, x . x) : x in F_p^{n-1}}`.
pub fn paraboloid(space: AmbientSpace) -> Result<PointSet> {
    let n = space.n();
    if n < 2 {
        return Err(invalid("the paraboloid needs dimension at least 2"));
    }
    let p = space.p();
    let base = AmbientSpace::with_budget(p, n - 1, u64::MAX)?;
    let mut idx = Vec::with_capacity(base.point_count() as usize);
    let mut buf = vec![0; n];
    for i in 0..base.point_count() {
        base.decode_into(PointIndex(i), &mut buf[..n - 1]);
        buf[n - 1] = dot_raw(&buf[..n - 1], &buf[..n - 1], p);
        idx.push(space.encode_unchecked(&buf));
    }
    PointSet::from_indices(space, idx)
}

/// `{x : x . x = r}`.
pub fn sphere(space: AmbientSpace, r: Residue) -> Result<PointSet> {
    if space.n() < 2 {
        return Err(invalid("the sphere needs dimension at least 2"));
    }
    if u64::from(r) >= space.p() {
        return Err(invalid(format!("radius {r} is not a residue mod {}", space.p())));
    }
    let mut buf = vec![0; space.n()];
    let idx: Vec<PointIndex> = (0..space.point_count())
        .map(PointIndex)
        .filter(|&i| {
            space.decode_into(i, &mut buf);
            dot_raw(&buf, &buf, space.p()) == r
        })
        .collect();
    PointSet::from_indices(space, idx)
}

/// `p^{n-1} -+ 2 p^{n/2}`, the window a sphere's size is reported against.
pub fn sphere_size_window(space: &AmbientSpace) -> (f64, f64) {
    let p = space.p() as f64;
    let n = space.n() as f64;
    let centre = p.powf(n - 1.0);
    let spread = 2.0 * p.powf((n - 1.0) / 2.0) * p.sqrt();
    (centre - spread, centre + spread)
}

/// How far a set is from Fourier decay of Salem type.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub set_size: u64,
    pub max_nonzero_modulus: f64,
    /// `max / sqrt|E|`
    pub ratio_salem: f64,
    /// `max / sqrt(|E| ln p)`
    pub ratio_weak: f64,
    pub witness: Vec<Residue>,
    /// `sqrt((p^n |E| - |E|^2) / (p^n - 1))`, forced by Plancherel.
    pub lower_bound: f64,
    pub lower_bound_ok: bool,
}

pub fn salem_deficiency(e: &PointSet) -> Result<DecayReport> {
    DecayReport::from_spectrum(&dft(e)?)
}

impl DecayReport {
    pub fn from_spectrum(s: &Spectrum) -> Result<Self> {
        let k = s.source_cardinality;
        if k == 0 || k == s.space.point_count() {
            return Err(invalid("decay is undefined for the empty set and the whole space"));
        }
        let (max, witness) = s.max_nonzero().expect("space has a nonzero point");
        let size = k as f64;
        let q = s.space.point_count() as f64;
        let lower_sq = (q * size - size * size) / (q - 1.0);
        Ok(DecayReport {
            set_size: k,
            max_nonzero_modulus: max,
            ratio_salem: max / size.sqrt(),
            ratio_weak: max / (size * (s.space.p() as f64).ln()).sqrt(),
            witness: s.space.decode(witness).coords().to_vec(),
            lower_bound: lower_sq.sqrt(),
            lower_bound_ok: max * max >= lower_sq * (1.0 - TOLERANCE),
        })
    }
}

/// A claimed decay `|E^(xi)| <= C |E|^alpha` for `xi != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SalemProfile {
    pub c: f64,
    pub alpha: f64,
}

impl SalemProfile {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("C must be positive, got {c}")));
        }
        if !(0.5..1.0).contains(&alpha) {
            return Err(invalid(format!("alpha must lie in [1/2, 1), got {alpha}")));
        }
        Ok(SalemProfile { c, alpha })
    }

    /// `C^{1/(1-alpha)}`: case (a) applies when `|E| <= C1 p^{m/(2-2 alpha)}`.
    pub fn c1(&self) -> f64 {
        self.c.powf(1.0 / (1.0 - self.alpha))
    }

    /// `1/(2 C^2)`: case (a) gives `|pi| >= C2 |E|^{2-2 alpha}`.
    pub fn c2(&self) -> f64 {
        1.0 / (2.0 * self.c * self.c)
    }

    /// `(2 C^2)^{1/(2-2 alpha)}`: every projection is full once
    /// `|E| > C3 p^{m/(1-alpha)}`.
    pub fn c3(&self) -> f64 {
        (2.0 * self.c * self.c).powf(1.0 / (2.0 - 2.0 * self.alpha))
    }

    pub fn holds_for(&self, max_nonzero_modulus: f64, set_size: u64) -> bool {
        max_nonzero_modulus <= self.c * (set_size as f64).powf(self.alpha) * (1.0 + TOLERANCE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayCase {
    /// Small sets: `|pi| >= C2 |E|^{2-2 alpha}`.
    A,
    /// Large sets: `|pi| >= p^m / 2`.
    B,
    /// Very large sets: every projection is full.
    C,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayProjectionReport {
    pub p: u64,
    pub n: usize,
    pub m: usize,
    pub set_size: u64,
    pub profile: SalemProfile,
    pub max_nonzero_modulus: f64,
    pub profile_satisfied: bool,
    pub case: DecayCase,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `C1 p^{m/(2-2 alpha)}`
    pub threshold_a: f64,
    /// `C3 p^{m/(1-alpha)}`
    pub threshold_c: f64,
    pub predicted_min: f64,
    pub observed_min: u64,
    pub directions: u64,
    /// Meaningful only when the profile is satisfied.
    pub conclusion_ok: bool,
}

/// Decides which decay case applies to `E` and checks its conclusion over
/// every `W in G(n, n-m)`.
///
/// Cases (a) and (b) split on `p^{-m}|E|^2 <= C^2 |E|^{2 alpha}`, which is
/// exactly `|E| <= C1 p^{m/(2-2 alpha)}`.
pub fn fourier_projection_bounds(e: &PointSet, profile: SalemProfile, m: usize) -> Result<DecayProjectionReport> {
    let space = *e.space();
    let n = space.n();
    if m == 0 || m >= n {
        return Err(invalid(format!("codimension must lie in 1..{n}, got {m}")));
    }
    if e.is_empty() {
        return Err(invalid("decay bounds need a nonempty set"));
    }
    let spectrum = dft(e)?;
    let max = spectrum.max_nonzero().map_or(0.0, |(v, _)| v);
    let size = e.len() as f64;
    let p = space.p() as f64;
    let mf = m as f64;
    let alpha = profile.alpha;
    let pm = space.pow(m);
    let threshold_a = profile.c1() * p.powf(mf / (2.0 - 2.0 * alpha));
    let threshold_c = profile.c3() * p.powf(mf / (1.0 - alpha));
    let (case, predicted_min) = if size > threshold_c {
        (DecayCase::C, pm as f64)
    } else if size.powf(2.0 - 2.0 * alpha) <= profile.c * profile.c * p.powf(mf) {
        (DecayCase::A, profile.c2() * size.powf(2.0 - 2.0 * alpha))
    } else {
        (DecayCase::B, pm as f64 / 2.0)
    };
    let dirs = Directions::of_codim(space, m)?;
    let observed_min = dirs.min_image_size(e)?;
    let conclusion_ok = match case {
        DecayCase::C => observed_min == pm,
        _ => observed_min as f64 >= predicted_min * (1.0 - TOLERANCE),
    };
    Ok(DecayProjectionReport {
        p: space.p(),
        n,
        m,
        set_size: e.len(),
        profile,
        max_nonzero_modulus: max,
        profile_satisfied: profile.holds_for(max, e.len()),
        case,
        c1: profile.c1(),
        c2: profile.c2(),
        c3: profile.c3(),
        threshold_a,
        threshold_c,
        predicted_min,
        observed_min,
        directions: dirs.len() as u64,
        conclusion_ok,
    })
}
