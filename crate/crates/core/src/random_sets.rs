//! Random subsets of F_p^n in which every point is kept independently with
//! probability `delta`, and the projection theorems checked on them.
//!
//! Trial `t` of seed `s` draws from a ChaCha8 stream keyed by `s` on stream
//! `t`; point `i` is decided by the `i`-th 64-bit word of that stream, so any
//! point can be regenerated without replaying the others.

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{AmbientSpace, PointIndex};
use crate::pointset::PointSet;
use crate::projections::{size_window_ok, Directions};

/// Points decided per independently positioned generator.
const SAMPLE_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercolationModel {
    #[serde(skip)]
    space: AmbientSpace,
    delta: f64,
    /// Declared exponent with `delta = p^{s-n}`.
    s: Option<f64>,
    seed: u64,
}

impl PercolationModel {
    pub fn new(space: AmbientSpace, delta: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(invalid(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(PercolationModel {
            space,
            delta,
            s: None,
            seed,
        })
    }

    /// `delta = p^{s-n}`.
    pub fn with_exponent(space: AmbientSpace, s: f64, seed: u64) -> Result<Self> {
        if !s.is_finite() || s > space.n() as f64 {
            return Err(invalid(format!("exponent {s} must be finite and at most {}", space.n())));
        }
        let delta = (space.p() as f64).powf(s - space.n() as f64).min(1.0);
        Ok(PercolationModel {
            space,
            delta,
            s: Some(s),
            seed,
        })
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn exponent(&self) -> Option<f64> {
        self.s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Expected size `p^n delta`.
    pub fn mean_size(&self) -> f64 {
        self.space.point_count() as f64 * self.delta
    }
}

/// The sample of trial `trial`; identical arguments give identical sets.
pub fn percolation_sample(model: &PercolationModel, trial: u64) -> PointSet {
    let space = model.space;
    let coin = Bernoulli::new(model.delta).expect("delta validated");
    let total = space.point_count();
    let chunk = |start: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
        rng.set_stream(trial);
        rng.set_word_pos(2 * u128::from(start));
        let end = (start + SAMPLE_CHUNK).min(total);
        (start..end)
            .filter(|_| coin.sample(&mut rng))
            .map(PointIndex)
            .collect::<Vec<_>>()
    };
    let starts: Vec<u64> = (0..total).step_by(SAMPLE_CHUNK as usize).collect();
    let kept: Vec<PointIndex> = if starts.len() > 1 {
        starts.into_par_iter().flat_map_iter(chunk).collect()
    } else {
        starts.into_iter().flat_map(chunk).collect()
    };
    PointSet::from_indices(space, kept).expect("indices in range")
}

/// `e^{-N delta'/16}`, bounding the chance that a sum of `N` independent
/// indicators with mean `delta'` falls below half its expectation.
pub fn chernoff_bound(trials: u64, delta_prime: f64) -> Result<f64> {
    if trials == 0 {
        return Err(invalid("need at least one indicator"));
    }
    if !(0.0..=1.0).contains(&delta_prime) {
        return Err(invalid(format!("probability {delta_prime} outside [0, 1]")));
    }
    Ok((-(trials as f64) * delta_prime / 16.0).exp())
}

/// The chain `mu >= p^m (1 - e^{-p^{s-m}}) >= p^m (p^{s-m} - 5 p^{2(s-m)}/6) >= p^s/6`
/// for the expected number of hit cosets.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuChain {
    pub p: u64,
    pub n: usize,
    pub m: usize,
    pub s: f64,
    pub delta: f64,
    /// `1 - (1 - delta)^{p^{n-m}}`, the chance a coset is hit.
    pub delta_prime: f64,
    /// `p^m delta'`
    pub mu: f64,
    pub exponential_bound: f64,
    pub quadratic_bound: f64,
    pub target: f64,
    pub holds: bool,
}

pub fn mu_lower_bound(p: u64, n: usize, m: usize, s: f64) -> Result<MuChain> {
    if m == 0 || m >= n {
        return Err(invalid(format!("codimension must lie in 1..{n}, got {m}")));
    }
    if !(s > 0.0 && s <= m as f64) {
        return Err(invalid(format!("exponent {s} must lie in (0, {m}]")));
    }
    let pf = p as f64;
    let (nf, mf) = (n as f64, m as f64);
    let delta = pf.powf(s - nf);
    // ln-space keeps (1 - delta)^{p^{n-m}} accurate for tiny delta
    let miss = (pf.powf(nf - mf) * (-delta).ln_1p()).exp();
    let delta_prime = 1.0 - miss;
    let pm = pf.powf(mf);
    let x = pf.powf(s - mf);
    let mu = pm * delta_prime;
    let exponential_bound = pm * -(-x).exp_m1();
    let quadratic_bound = pm * (x - 5.0 * x * x / 6.0);
    let target = pf.powf(s) / 6.0;
    let slack = 1e-12 * pm;
    let holds = mu + slack >= exponential_bound
        && exponential_bound + slack >= quadratic_bound
        && quadratic_bound + slack >= target;
    Ok(MuChain {
        p,
        n,
        m,
        s,
        delta,
        delta_prime,
        mu,
        exponential_bound,
        quadratic_bound,
        target,
        holds,
    })
}

/// Smallest prime of the grid from which the chain holds for every larger
/// grid prime.
pub fn chain_threshold(primes: &[u64], n: usize, m: usize, s: f64) -> Result<Option<u64>> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    let mut threshold = None;
    for &p in sorted.iter().rev() {
        if mu_lower_bound(p, n, m, s)?.holds {
            threshold = Some(p);
        } else {
            break;
        }
    }
    Ok(threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `s <= m`: every projection keeps a fixed fraction of `E`.
    Small,
    /// `s > m`: every projection is full.
    Large,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub size: u64,
    pub min_projection: u64,
    pub window_ok: bool,
    pub all_full: bool,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinProjectionStats {
    pub min: u64,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PercolationReport {
    pub theorem: Regime,
    pub p: u64,
    pub n: usize,
    pub m: usize,
    pub s: f64,
    pub delta: f64,
    pub seed: u64,
    pub trials: u64,
    pub directions: u64,
    /// Fraction of trials with `p^s/2 <= |E| <= 2 p^s`.
    pub size_window_pass: f64,
    pub min_projection_stats: MinProjectionStats,
    pub success_rate: f64,
    /// `"|E|/24"` or `"p^m"`.
    pub threshold: String,
    /// Small regime: `mu = p^m delta'`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Small regime: fraction of trials with some `|pi^W(E)| < mu/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub below_half_mu_rate: Option<f64>,
    /// Small regime: `2 p^{m(n-m)} e^{-p^s/96}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub below_half_mu_bound: Option<f64>,
    /// Large regime: fraction of (trial, plane) pairs with an empty intersection.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_miss_rate: Option<f64>,
    /// Large regime: `(1 - delta)^{p^{n-m}}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_miss_probability: Option<f64>,
    /// Large regime: `e^{-p^{s-m}}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_miss_bound: Option<f64>,
    pub per_trial: Vec<TrialOutcome>,
}

struct RawTrial {
    size: u64,
    sizes: Vec<u64>,
}

fn run_trials(model: &PercolationModel, dirs: &Directions, trials: u64) -> Vec<RawTrial> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let e = percolation_sample(model, t);
            let sizes = dirs.image_sizes(&e).expect("same space");
            RawTrial { size: e.len(), sizes }
        })
        .collect()
}

fn check_regime(n: usize, m: usize, s: f64, trials: u64) -> Result<()> {
    if m == 0 || m >= n {
        return Err(invalid(format!("codimension must lie in 1..{n}, got {m}")));
    }
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    if !s.is_finite() {
        return Err(invalid("exponent must be finite"));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    theorem: Regime,
    model: &PercolationModel,
    m: usize,
    s: f64,
    dirs: &Directions,
    raw: &[RawTrial],
    success: impl Fn(&RawTrial, u64, bool) -> bool,
    threshold: &str,
) -> PercolationReport {
    let space = model.space;
    let pm = space.pow(m);
    let per_trial: Vec<TrialOutcome> = raw
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let min_projection = r.sizes.iter().copied().min().unwrap_or(0);
            let window_ok = size_window_ok(space.p(), s, r.size);
            TrialOutcome {
                trial: t as u64,
                size: r.size,
                min_projection,
                window_ok,
                all_full: min_projection == pm,
                success: success(r, min_projection, window_ok),
            }
        })
        .collect();
    let k = per_trial.len() as f64;
    let frac = |f: &dyn Fn(&TrialOutcome) -> bool| per_trial.iter().filter(|t| f(t)).count() as f64 / k;
    PercolationReport {
        theorem,
        p: space.p(),
        n: space.n(),
        m,
        s,
        delta: model.delta,
        seed: model.seed,
        trials: per_trial.len() as u64,
        directions: dirs.len() as u64,
        size_window_pass: frac(&|t| t.window_ok),
        min_projection_stats: MinProjectionStats {
            min: per_trial.iter().map(|t| t.min_projection).min().unwrap_or(0),
            mean: per_trial.iter().map(|t| t.min_projection as f64).sum::<f64>() / k,
        },
        success_rate: frac(&|t| t.success),
        threshold: threshold.to_string(),
        mu: None,
        below_half_mu_rate: None,
        below_half_mu_bound: None,
        plane_miss_rate: None,
        plane_miss_probability: None,
        plane_miss_bound: None,
        per_trial,
    }
}

/// Trials succeed when `|E|` is within a factor 2 of `p^s` and every
/// projection keeps at least `|E|/24` cosets.
pub fn verify_small_regime(p: u64, n: usize, m: usize, s: f64, trials: u64, seed: u64) -> Result<PercolationReport> {
    check_regime(n, m, s, trials)?;
    if !(s > 0.0 && s <= m as f64) {
        return Err(invalid(format!("the small regime needs 0 < s <= m, got s = {s}")));
    }
    let space = AmbientSpace::new(p, n)?;
    let model = PercolationModel::with_exponent(space, s, seed)?;
    let dirs = Directions::of_codim(space, m)?;
    let raw = run_trials(&model, &dirs, trials);
    let chain = mu_lower_bound(p, n, m, s)?;
    let mut report = assemble(
        Regime::Small,
        &model,
        m,
        s,
        &dirs,
        &raw,
        |r, min, window| window && 24 * min >= r.size,
        "|E|/24",
    );
    let below = raw
        .iter()
        .filter(|r| r.sizes.iter().any(|&x| (x as f64) < chain.mu / 2.0))
        .count();
    report.mu = Some(chain.mu);
    report.below_half_mu_rate = Some(below as f64 / trials as f64);
    report.below_half_mu_bound =
        Some(2.0 * (p as f64).powf((m * (n - m)) as f64) * (-(p as f64).powf(s) / 96.0).exp());
    Ok(report)
}

/// Trials succeed when every projection is full, that is, every plane of
/// dimension `n - m` meets the sample.
pub fn verify_large_regime(p: u64, n: usize, m: usize, s: f64, trials: u64, seed: u64) -> Result<PercolationReport> {
    check_regime(n, m, s, trials)?;
    if !(s > m as f64 && s <= n as f64) {
        return Err(invalid(format!("the large regime needs m < s <= n, got s = {s}")));
    }
    let space = AmbientSpace::new(p, n)?;
    let model = PercolationModel::with_exponent(space, s, seed)?;
    let dirs = Directions::of_codim(space, m)?;
    let raw = run_trials(&model, &dirs, trials);
    let pm = space.pow(m);
    let mut report = assemble(Regime::Large, &model, m, s, &dirs, &raw, |_, min, _| min == pm, "p^m");
    let missed: u64 = raw.iter().flat_map(|r| r.sizes.iter().map(|&x| pm - x)).sum();
    let planes = dirs.len() as f64 * pm as f64;
    report.plane_miss_rate = Some(missed as f64 / (planes * trials as f64));
    let pf = p as f64;
    report.plane_miss_probability = Some((pf.powf((n - m) as f64) * (-model.delta).ln_1p()).exp());
    report.plane_miss_bound = Some((-pf.powf(s - m as f64)).exp());
    Ok(report)
}

/// Smallest prime among `reports` from which every trial succeeded, at that
/// prime and at every larger one. Only an empirical stand-in for the
/// unspecified constant in the asymptotic statements.
pub fn empirical_threshold(reports: &[PercolationReport]) -> Option<u64> {
    let mut sorted: Vec<&PercolationReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.p);
    let mut threshold = None;
    for r in sorted.iter().rev() {
        if r.success_rate < 1.0 {
            break;
        }
        threshold = Some(r.p);
    }
    threshold
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChebyshevReport {
    pub trials: u64,
    pub mean_size: f64,
    pub expected_size: f64,
    /// Trials with `||E| - p^n delta| > p^n delta / 2`.
    pub deviations: u64,
    pub deviation_rate: f64,
    /// `4 p^n delta (1 - delta) / (p^n delta)^2`
    pub bound: f64,
    /// Three binomial standard errors at the bound.
    pub slack: f64,
    pub within_bound: bool,
    /// Sample mean within four standard errors of `p^n delta`.
    pub mean_ok: bool,
    /// Fraction of trials without a deviation.
    pub pass_rate: f64,
}

pub fn chebyshev_size_check(model: &PercolationModel, trials: u64) -> Result<ChebyshevReport> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let expected = model.mean_size();
    let sizes: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| percolation_sample(model, t).len())
        .collect();
    let deviations = sizes
        .iter()
        .filter(|&&k| (k as f64 - expected).abs() > expected / 2.0)
        .count() as u64;
    let k = trials as f64;
    let variance = expected * (1.0 - model.delta);
    let bound = if expected > 0.0 { 4.0 * variance / (expected * expected) } else { 1.0 };
    let b = bound.min(1.0);
    let slack = 3.0 * (b * (1.0 - b) / k).sqrt();
    let mean_size = sizes.iter().sum::<u64>() as f64 / k;
    let rate = deviations as f64 / k;
    Ok(ChebyshevReport {
        trials,
        mean_size,
        expected_size: expected,
        deviations,
        deviation_rate: rate,
        bound,
        slack,
        within_bound: rate <= bound + slack,
        mean_ok: (mean_size - expected).abs() <= 4.0 * (variance / k).sqrt() + 1e-12,
        pass_rate: 1.0 - rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspaces::gaussian_binomial;

    fn space(p: u64, n: usize) -> AmbientSpace {
        AmbientSpace::new(p, n).unwrap()
    }

    #[test]
    fn sample_extremes_and_determinism() {
        let s = space(5, 2);
        let full = PercolationModel::new(s, 1.0, 9).unwrap();
        assert!(percolation_sample(&full, 0).is_full());
        let none = PercolationModel::new(s, 0.0, 9).unwrap();
        assert!(percolation_sample(&none, 0).is_empty());
        let half = PercolationModel::new(s, 0.5, 42).unwrap();
        let a = percolation_sample(&half, 3);
        let b = percolation_sample(&half, 3);
        assert_eq!(a.indicator(), b.indicator());
        assert_ne!(percolation_sample(&half, 4).indicator(), a.indicator());
        assert!(PercolationModel::new(s, 1.5, 0).is_err());
    }

    #[test]
    fn chunked_sampling_matches_sequential() {
        // 2^17 points span two generator chunks.
        let s = space(2, 17);
        let model = PercolationModel::new(s, 0.3, 5).unwrap();
        let e = percolation_sample(&model, 2);
        let coin = Bernoulli::new(0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        rng.set_stream(2);
        let expected: Vec<u64> = (0..s.point_count()).filter(|_| coin.sample(&mut rng)).collect();
        assert_eq!(e.indices().map(|i| i.0).collect::<Vec<_>>(), expected);
    }

    #[test]
    fn exponent_gives_delta() {
        let m = PercolationModel::with_exponent(space(7, 2), 1.0, 0).unwrap();
        assert!((m.delta() - 1.0 / 7.0).abs() < 1e-12);
        assert!(PercolationModel::with_exponent(space(7, 2), 2.5, 0).is_err());
    }

    #[test]
    fn chernoff_examples() {
        assert!((chernoff_bound(100, 0.5).unwrap() - 0.04394).abs() < 1e-5);
        assert_eq!(chernoff_bound(10, 0.0).unwrap(), 1.0);
        assert!((chernoff_bound(16, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(chernoff_bound(0, 0.5).is_err());
    }

    #[test]
    fn mu_examples() {
        let c = mu_lower_bound(5, 2, 1, 1.0).unwrap();
        assert!((c.delta_prime - (1.0 - 0.8f64.powi(5))).abs() < 1e-12);
        assert!((c.mu - 3.3616).abs() < 1e-4);
        assert!(c.mu >= 5.0 / 6.0 && c.holds);
        let c = mu_lower_bound(3, 2, 1, 0.5).unwrap();
        assert!(c.holds);
        for p in [3u64, 11, 101, 1009] {
            let c = mu_lower_bound(p, 3, 2, 2.0).unwrap();
            assert!(c.mu / (p * p) as f64 >= 1.0 - (-1f64).exp() - 1e-12);
        }
        assert!(mu_lower_bound(5, 2, 1, 1.5).is_err());
        assert_eq!(chain_threshold(&[7, 3, 5], 2, 1, 1.0).unwrap(), Some(3));
    }

    #[test]
    fn small_regime_report() {
        let r = verify_small_regime(7, 2, 1, 1.0, 50, 42).unwrap();
        assert_eq!(r.trials, 50);
        assert_eq!(r.directions, 8);
        assert!((0.0..=1.0).contains(&r.success_rate));
        assert!(r.per_trial.iter().all(|t| t.min_projection <= t.size.min(7)));
        let again = verify_small_regime(7, 2, 1, 1.0, 50, 42).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
        assert!(verify_small_regime(7, 2, 1, 1.5, 10, 0).is_err());
    }

    #[test]
    fn large_regime_report() {
        let r = verify_large_regime(5, 2, 1, 2.0, 20, 1).unwrap();
        assert_eq!(r.success_rate, 1.0);
        assert_eq!(r.plane_miss_rate, Some(0.0));
        let r = verify_large_regime(5, 3, 1, 2.0, 10, 1).unwrap();
        let planes = r.directions * 5;
        assert_eq!(planes, 5 * gaussian_binomial(3, 2, 5).unwrap().to_u64().unwrap());
        assert_eq!(planes, 155);
        assert!(verify_large_regime(5, 2, 1, 1.0, 10, 0).is_err());
    }

    #[test]
    fn threshold_needs_every_larger_prime() {
        let run = |p, s| verify_large_regime(p, 2, 1, s, 10, 1).unwrap();
        // s = 2 keeps every point, so every trial succeeds.
        let all = [run(3, 2.0), run(5, 2.0), run(7, 2.0)];
        assert_eq!(empirical_threshold(&all), Some(3));
        let mut mixed = all.clone();
        mixed[2].success_rate = 0.9;
        assert_eq!(empirical_threshold(&mixed), None);
        mixed[0].success_rate = 0.5;
        mixed[2].success_rate = 1.0;
        assert_eq!(empirical_threshold(&mixed), Some(5));
        assert_eq!(empirical_threshold(&[]), None);
    }

    #[test]
    fn chebyshev_examples() {
        let full = PercolationModel::new(space(7, 2), 1.0, 0).unwrap();
        let r = chebyshev_size_check(&full, 10).unwrap();
        assert_eq!(r.pass_rate, 1.0);
        assert_eq!(r.bound, 0.0);
        let model = PercolationModel::with_exponent(space(7, 2), 1.0, 3).unwrap();
        let r = chebyshev_size_check(&model, 2000).unwrap();
        assert!(r.bound <= 4.0 / 7.0);
        assert!(r.within_bound && r.mean_ok, "{r:?}");
    }
}
