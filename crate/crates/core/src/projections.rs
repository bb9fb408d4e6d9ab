//! Coset projections `pi^W(E)` and exceptional-direction censuses.
//!
//! Cosets of `W` are labelled through `Per(W)`: with `y_1..y_k` the RREF
//! basis of `Per(W)`, the label of `x` is the base-p number with digits
//! `x . y_i`. Since `Per(Per(W)) = W`, two points share a label exactly when
//! their difference lies in `W`, and all `p^k` labels occur.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{dot_raw, AmbientSpace, FpVector, PointIndex, Residue};
use crate::pointset::PointSet;
use crate::subspaces::{coset_of, grassmannian_with_budget, AffinePlane, Subspace, DEFAULT_SUBSPACE_BUDGET};

/// Dense tallies are used up to this many labels; sorting beyond.
const DENSE_LABEL_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CosetLabel(pub u64);

impl fmt::Display for CosetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Maps points to the label of their coset of a fixed subspace.
#[derive(Debug, Clone)]
pub struct CosetLabeler {
    space: AmbientSpace,
    /// RREF basis of `Per(W)`, concatenated.
    dual: Vec<Residue>,
    codim: usize,
}

impl CosetLabeler {
    pub fn new(w: &Subspace) -> Self {
        let dual = w.perp();
        CosetLabeler {
            space: *w.space(),
            codim: dual.dim(),
            dual: dual.rows().flatten().copied().collect(),
        }
    }

    /// Number of cosets, `p^codim`.
    pub fn label_count(&self) -> u64 {
        self.space.pow(self.codim)
    }

    pub(crate) fn label_raw(&self, x: &[Residue]) -> CosetLabel {
        let p = self.space.p();
        let n = self.space.n();
        let mut label = 0u64;
        for row in self.dual.chunks_exact(n).rev() {
            label = label * p + u64::from(dot_raw(x, row, p));
        }
        CosetLabel(label)
    }

    pub fn label(&self, x: &FpVector) -> Result<CosetLabel> {
        self.space.check(x)?;
        Ok(self.label_raw(x.coords()))
    }

    /// `(label, count, smallest member index)` for every hit coset, by label.
    fn tally(&self, e: &PointSet) -> Vec<(CosetLabel, u64, PointIndex)> {
        let n = self.space.n();
        let mut buf = vec![0; n];
        let labels = self.label_count();
        if labels <= DENSE_LABEL_LIMIT {
            let mut counts = vec![0u64; labels as usize];
            let mut first = vec![u64::MAX; labels as usize];
            for idx in e.indices() {
                self.space.decode_into(idx, &mut buf);
                let l = self.label_raw(&buf).0 as usize;
                counts[l] += 1;
                if first[l] == u64::MAX {
                    first[l] = idx.0;
                }
            }
            counts
                .iter()
                .zip(&first)
                .enumerate()
                .filter(|(_, (&c, _))| c > 0)
                .map(|(l, (&c, &f))| (CosetLabel(l as u64), c, PointIndex(f)))
                .collect()
        } else {
            let mut pairs: Vec<(CosetLabel, PointIndex)> = e
                .indices()
                .map(|idx| {
                    self.space.decode_into(idx, &mut buf);
                    (self.label_raw(&buf), idx)
                })
                .collect();
            pairs.sort_unstable();
            let mut out: Vec<(CosetLabel, u64, PointIndex)> = Vec::new();
            for (l, idx) in pairs {
                match out.last_mut() {
                    Some(last) if last.0 == l => last.1 += 1,
                    _ => out.push((l, 1, idx)),
                }
            }
            out
        }
    }

    /// Lookup of `|E ∩ coset|` by label.
    pub(crate) fn counts(&self, e: &PointSet) -> impl Fn(CosetLabel) -> u64 {
        let tally: Vec<(CosetLabel, u64)> = self.tally(e).into_iter().map(|(l, c, _)| (l, c)).collect();
        move |label| {
            tally
                .binary_search_by_key(&label, |t| t.0)
                .map_or(0, |i| tally[i].1)
        }
    }

    /// `|pi^W(E)|` without materializing the labels.
    pub fn image_size(&self, e: &PointSet) -> u64 {
        let labels = self.label_count();
        if labels > DENSE_LABEL_LIMIT {
            return self.tally(e).len() as u64;
        }
        let mut seen = vec![0u64; labels.div_ceil(64) as usize];
        let mut buf = vec![0; self.space.n()];
        let mut size = 0;
        for idx in e.indices() {
            self.space.decode_into(idx, &mut buf);
            let l = self.label_raw(&buf).0;
            let (w, b) = ((l / 64) as usize, l % 64);
            if seen[w] >> b & 1 == 0 {
                seen[w] |= 1 << b;
                size += 1;
                if size == labels {
                    break;
                }
            }
        }
        size
    }
}

fn check_same_space(e: &PointSet, w: &Subspace) -> Result<()> {
    if e.space() != w.space() {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// The set of cosets of `direction` that meet a point set.
#[derive(Debug, Clone)]
pub struct ProjectionImage {
    direction: Arc<Subspace>,
    cosets: Vec<CosetLabel>,
    witnesses: Vec<PointIndex>,
}

impl ProjectionImage {
    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    pub fn size(&self) -> u64 {
        self.cosets.len() as u64
    }

    pub fn cosets(&self) -> &[CosetLabel] {
        &self.cosets
    }

    /// Codimension `m` of the direction; there are `p^m` cosets in all.
    pub fn codim(&self) -> usize {
        self.direction.codim()
    }

    pub fn is_full(&self) -> bool {
        self.size() == self.direction.space().pow(self.codim())
    }

    /// Projection along the zero subspace or the whole space.
    pub fn is_degenerate(&self) -> bool {
        self.direction.dim() == 0 || self.direction.codim() == 0
    }

    /// The hit cosets as affine planes.
    pub fn planes(&self) -> Vec<AffinePlane> {
        let space = self.direction.space();
        self.witnesses
            .iter()
            .map(|&i| coset_of(&self.direction, &space.decode(i)).expect("same space"))
            .collect()
    }
}

/// `pi^W(E)`: the cosets of `W` that intersect `E`.
pub fn project(e: &PointSet, w: &Subspace) -> Result<ProjectionImage> {
    check_same_space(e, w)?;
    let tally = CosetLabeler::new(w).tally(e);
    Ok(ProjectionImage {
        direction: Arc::new(w.clone()),
        cosets: tally.iter().map(|t| t.0).collect(),
        witnesses: tally.iter().map(|t| t.2).collect(),
    })
}

/// `P_V(E) = pi^{Per(V)}(E)`.
pub fn project_onto(e: &PointSet, v: &Subspace) -> Result<ProjectionImage> {
    project(e, &v.perp())
}

/// How many points of `E` lie in each coset of `W`.
#[derive(Debug, Clone, Serialize)]
pub struct CosetProfile {
    #[serde(skip)]
    direction: Arc<Subspace>,
    counts: Vec<(CosetLabel, u64)>,
    total: u64,
}

impl CosetProfile {
    pub fn direction(&self) -> &Subspace {
        &self.direction
    }

    /// Nonzero counts, ordered by label.
    pub fn counts(&self) -> &[(CosetLabel, u64)] {
        &self.counts
    }

    pub fn count(&self, label: CosetLabel) -> u64 {
        self.counts
            .binary_search_by_key(&label, |c| c.0)
            .map_or(0, |i| self.counts[i].1)
    }

    /// `|E ∩ plane|` for a plane whose direction is this profile's subspace.
    pub fn count_plane(&self, plane: &AffinePlane) -> Result<u64> {
        if plane.direction() != &*self.direction {
            return Err(invalid("plane direction differs from the profile direction"));
        }
        let label = CosetLabeler::new(&self.direction).label(plane.rep())?;
        Ok(self.count(label))
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `|pi^W(E)|`.
    pub fn support(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.counts.iter().map(|&(_, c)| u128::from(c) * u128::from(c)).sum()
    }

    /// `|E|^2 <= |pi^W(E)| * sum_j |E ∩ (x_j + W)|^2`.
    pub fn cauchy_schwarz_holds(&self) -> bool {
        let t = u128::from(self.total);
        t * t <= u128::from(self.support()) * self.sum_of_squares()
    }
}

pub fn coset_profile(e: &PointSet, w: &Subspace) -> Result<CosetProfile> {
    check_same_space(e, w)?;
    let counts = CosetLabeler::new(w)
        .tally(e)
        .into_iter()
        .map(|(l, c, _)| (l, c))
        .collect();
    Ok(CosetProfile {
        direction: Arc::new(w.clone()),
        counts,
        total: e.len(),
    })
}

/// The directions `W in G(n, n-m)` of a census, with their labelers.
#[derive(Debug, Clone)]
pub struct Directions {
    space: AmbientSpace,
    m: usize,
    subspaces: Vec<Arc<Subspace>>,
    labelers: Vec<CosetLabeler>,
}

impl Directions {
    /// All subspaces of codimension `m`, in enumeration order.
    pub fn of_codim(space: AmbientSpace, m: usize) -> Result<Self> {
        Self::of_codim_with_budget(space, m, DEFAULT_SUBSPACE_BUDGET)
    }

    pub fn of_codim_with_budget(space: AmbientSpace, m: usize, budget: u64) -> Result<Self> {
        if m > space.n() {
            return Err(invalid(format!("codimension {m} exceeds {}", space.n())));
        }
        let subspaces: Vec<Arc<Subspace>> = grassmannian_with_budget(space, space.n() - m, budget)?
            .map(Arc::new)
            .collect();
        let labelers = subspaces.par_iter().map(|w| CosetLabeler::new(w)).collect();
        Ok(Directions {
            space,
            m,
            subspaces,
            labelers,
        })
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn codim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspaces(&self) -> &[Arc<Subspace>] {
        &self.subspaces
    }

    pub fn labelers(&self) -> &[CosetLabeler] {
        &self.labelers
    }

    /// `|pi^W(E)|` for every direction, in enumeration order.
    pub fn image_sizes(&self, e: &PointSet) -> Result<Vec<u64>> {
        if e.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        let work = self.labelers.len() as u64 * e.len();
        Ok(if work > 1 << 16 {
            self.labelers.par_iter().map(|l| l.image_size(e)).collect()
        } else {
            self.labelers.iter().map(|l| l.image_size(e)).collect()
        })
    }

    pub fn min_image_size(&self, e: &PointSet) -> Result<u64> {
        Ok(self.image_sizes(e)?.into_iter().min().unwrap_or(0))
    }
}

/// A positive fraction `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("zero denominator"));
        }
        let g = gcd(num, den);
        Ok(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::str::FromStr for Fraction {
    type Err = Error;

    /// Accepts `a/b` or a terminating decimal such as `0.25`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || invalid(format!("cannot read {s:?} as a fraction"));
        if let Some((a, b)) = s.split_once('/') {
            return Fraction::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        Fraction::new(num, den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn pow128(p: u64, e: u32) -> Result<u128> {
    u128::from(p)
        .checked_pow(e)
        .ok_or_else(|| invalid(format!("{p}^{e} overflows the bound arithmetic")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusKind {
    /// `|pi^W(E)| <= N` with `N < |E|/2`.
    Small,
    /// `|pi^W(E)| <= delta p^m`.
    Large,
    /// `|pi^W(E)| <= p^t/10` for `t <= s <= m`.
    FractionOfSize,
    /// `|pi^W(E)| <= p^m/10` for `s > m`.
    FractionOfCosets,
    /// `|pi^W(E)| < p^m` for `s > 2m`.
    NotFull,
}

/// Observed number of exceptional directions against the proven bound.
#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub kind: CensusKind,
    pub p: u64,
    pub n: usize,
    pub m: usize,
    /// The parameter as given: `N`, `delta`, or `s,t`.
    pub parameter: String,
    /// Directions with `|pi^W(E)| <= threshold` are exceptional.
    pub threshold: u64,
    pub observed: u64,
    pub bound_num: u128,
    /// Zero when the bound is infinite.
    pub bound_den: u128,
    pub satisfied: bool,
    pub hypothesis_ok: bool,
    pub directions: u64,
    pub set_size: u64,
    #[serde(skip)]
    pub sizes: Vec<u64>,
}

impl CensusReport {
    pub fn bound(&self) -> f64 {
        if self.bound_den == 0 {
            f64::INFINITY
        } else {
            self.bound_num as f64 / self.bound_den as f64
        }
    }

    /// A hypothesis-satisfying report whose bound fails. Proven bounds make
    /// this an implementation defect.
    pub fn is_violation(&self) -> bool {
        self.hypothesis_ok && !self.satisfied
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    kind: CensusKind,
    dirs: &Directions,
    e: &PointSet,
    sizes: Vec<u64>,
    parameter: String,
    threshold: u64,
    observed: u64,
    (num, den): (u128, u128),
    hypothesis_ok: bool,
) -> CensusReport {
    let g = gcd128(num, den);
    let (num, den) = if den == 0 { (1, 0) } else { (num / g, den / g) };
    let satisfied = den == 0 || u128::from(observed) * den <= num;
    CensusReport {
        kind,
        p: dirs.space.p(),
        n: dirs.space.n(),
        m: dirs.m,
        parameter,
        threshold,
        observed,
        bound_num: num,
        bound_den: den,
        satisfied,
        hypothesis_ok,
        directions: dirs.len() as u64,
        set_size: e.len(),
        sizes,
    }
}

/// Counts `W in G(n,n-m)` with `|pi^W(E)| <= N` against `4 p^{(n-m)m-m} N`.
pub fn exceptional_census_small(e: &PointSet, dirs: &Directions, big_n: u64) -> Result<CensusReport> {
    let sizes = dirs.image_sizes(e)?;
    let (p, n, m) = (dirs.space.p(), dirs.space.n(), dirs.m);
    if m == 0 || m >= n {
        return Err(invalid(format!("codimension must lie in 1..{n}, got {m}")));
    }
    let observed = sizes.iter().filter(|&&s| s <= big_n).count() as u64;
    let bound = 4 * pow128(p, ((n - m) * m - m) as u32)? * u128::from(big_n);
    let hypothesis_ok = 2 * big_n < e.len();
    Ok(report(
        CensusKind::Small,
        dirs,
        e,
        sizes,
        format!("N={big_n}"),
        big_n,
        observed,
        (bound, 1),
        hypothesis_ok,
    ))
}

/// Counts `W` with `|pi^W(E)| <= delta p^m` against
/// `2 (delta/(1-delta)) p^{m(n-m)+m} / |E|`, in exact rationals.
pub fn exceptional_census_large(e: &PointSet, dirs: &Directions, delta: Fraction) -> Result<CensusReport> {
    if delta.num == 0 || delta.num >= delta.den {
        return Err(invalid(format!("delta must lie strictly between 0 and 1, got {delta}")));
    }
    let sizes = dirs.image_sizes(e)?;
    let (p, n, m) = (dirs.space.p(), dirs.space.n(), dirs.m);
    if m == 0 || m >= n {
        return Err(invalid(format!("codimension must lie in 1..{n}, got {m}")));
    }
    let pm = u128::from(dirs.space.pow(m));
    let cutoff = u128::from(delta.num) * pm;
    let observed = sizes
        .iter()
        .filter(|&&s| u128::from(s) * u128::from(delta.den) <= cutoff)
        .count() as u64;
    let threshold = (cutoff / u128::from(delta.den)) as u64;
    let num = 2 * u128::from(delta.num) * pow128(p, (m * (n - m) + m) as u32)?;
    let den = u128::from(delta.den - delta.num) * u128::from(e.len());
    Ok(report(
        CensusKind::Large,
        dirs,
        e,
        sizes,
        format!("delta={delta}"),
        threshold,
        observed,
        (num, den),
        !e.is_empty(),
    ))
}

/// `coef * p^exp` as a fraction: exact when `exp` is an integer, else the
/// floor of the real value (observed counts are integers, so the comparison
/// is unchanged).
fn real_bound(p: u64, coef: Fraction, exp: f64) -> Result<(u128, u128)> {
    let rounded = exp.round();
    if (exp - rounded).abs() < 1e-12 {
        if rounded < 0.0 {
            let d = pow128(p, (-rounded) as u32)?;
            return Ok((u128::from(coef.num), u128::from(coef.den) * d));
        }
        let v = pow128(p, rounded as u32)?;
        return Ok((u128::from(coef.num) * v, u128::from(coef.den)));
    }
    let real = coef.as_f64() * (p as f64).powf(exp);
    Ok((real.floor() as u128, 1))
}

/// `floor(p^t / 10)`.
fn tenth_power_floor(p: u64, t: f64) -> Result<u64> {
    let rounded = t.round();
    if (t - rounded).abs() < 1e-12 && rounded >= 0.0 {
        return Ok((pow128(p, rounded as u32)? / 10) as u64);
    }
    Ok(((p as f64).powf(t) / 10.0).floor() as u64)
}

/// Whether `p^s/2 <= |E| <= 2 p^s`.
pub fn size_window_ok(p: u64, s: f64, size: u64) -> bool {
    let target = (p as f64).powf(s);
    let size = size as f64;
    target / 2.0 <= size && size <= 2.0 * target
}

/// The three censuses for a set declared to have size about `p^s`.
pub fn size_exponent_censuses(e: &PointSet, dirs: &Directions, s: f64, t: f64) -> Result<[CensusReport; 3]> {
    if !(s.is_finite() && t.is_finite()) {
        return Err(invalid("s and t must be finite"));
    }
    let sizes = dirs.image_sizes(e)?;
    let (p, n, m) = (dirs.space.p(), dirs.space.n(), dirs.m);
    if m == 0 || m >= n {
        return Err(invalid(format!("codimension must lie in 1..{n}, got {m}")));
    }
    let window = size_window_ok(p, s, e.len());
    let grass = (m * (n - m)) as f64;
    let mf = m as f64;
    let pm = dirs.space.pow(m);
    let count_le = |th: u64| sizes.iter().filter(|&&x| x <= th).count() as u64;
    let half = Fraction { num: 1, den: 2 };
    let four = Fraction { num: 4, den: 1 };
    let param = format!("s={s},t={t}");

    let th_a = tenth_power_floor(p, t)?;
    let a = report(
        CensusKind::FractionOfSize,
        dirs,
        e,
        sizes.clone(),
        param.clone(),
        th_a,
        count_le(th_a),
        real_bound(p, half, grass - (mf - t))?,
        window && s <= mf && t > 0.0 && t <= s,
    );
    let th_b = pm / 10;
    let b = report(
        CensusKind::FractionOfCosets,
        dirs,
        e,
        sizes.clone(),
        param.clone(),
        th_b,
        count_le(th_b),
        real_bound(p, half, grass - (s - mf))?,
        window && s > mf,
    );
    let th_c = pm - 1;
    let c = report(
        CensusKind::NotFull,
        dirs,
        e,
        sizes.clone(),
        param,
        th_c,
        count_le(th_c),
        real_bound(p, four, grass - (s - 2.0 * mf))?,
        window && s > 2.0 * mf,
    );
    Ok([a, b, c])
}
