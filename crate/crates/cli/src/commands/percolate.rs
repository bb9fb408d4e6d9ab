use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use ffproj_core::random_sets::{
    chebyshev_size_check, empirical_threshold, mu_lower_bound, verify_large_regime, verify_small_regime,
    ChebyshevReport, MuChain, PercolationModel, PercolationReport, TrialOutcome,
};
use ffproj_core::AmbientSpace;
use serde::Serialize;

use crate::config::{pick, require, ConfigFile};
use crate::manifest::{Check, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeArg {
    Small,
    Large,
}

/// Sample random sets and record how often every projection is large.
#[derive(Debug, Args)]
pub struct PercolateArgs {
    #[arg(long, value_enum)]
    regime: Option<RegimeArg>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Size exponent: points are kept with probability p^{s-n}.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run each listed prime instead of `--p` and report the trend.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<u64>>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    regime: RegimeArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<Vec<u64>>,
    n: usize,
    m: usize,
    s: f64,
    trials: u64,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct Report {
    #[serde(flatten)]
    percolation: PercolationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_chain: Option<MuChain>,
    size_concentration: ChebyshevReport,
}

#[derive(Debug, Serialize)]
struct GridRow {
    p: u64,
    success_rate: f64,
    size_window_pass: f64,
    min_projection_mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_chain_holds: Option<bool>,
}

#[derive(Debug, Serialize)]
struct GridReport {
    rows: Vec<GridRow>,
    /// Success rates never drop as p grows along the grid.
    non_decreasing: bool,
    /// Smallest grid prime from which every trial succeeds.
    empirical_p0: Option<u64>,
}

fn run_one(r: &Resolved, p: u64) -> Result<(PercolationReport, Option<MuChain>)> {
    Ok(match r.regime {
        RegimeArg::Small => (
            verify_small_regime(p, r.n, r.m, r.s, r.trials, r.seed)?,
            Some(mu_lower_bound(p, r.n, r.m, r.s)?),
        ),
        RegimeArg::Large => (verify_large_regime(p, r.n, r.m, r.s, r.trials, r.seed)?, None),
    })
}

/// A trial whose minimum projection falls outside `[1, min(|E|, p^m)]`.
fn out_of_range(report: &PercolationReport) -> Option<&TrialOutcome> {
    let pm = report.p.pow(report.m as u32);
    report
        .per_trial
        .iter()
        .find(|t| t.min_projection > t.size.min(pm) || (t.size > 0 && t.min_projection == 0))
}

fn range_check(reports: &[&PercolationReport]) -> Check {
    let bad = reports.iter().find_map(|r| out_of_range(r).map(|t| (r.p, t)));
    let check = Check::new("projection sizes within [1, min(|E|, p^m)]", bad.is_none());
    match bad {
        Some((p, t)) => check.with_detail(format!("p = {p}, trial {}: |E| = {}, min = {}", t.trial, t.size, t.min_projection)),
        None => check,
    }
}

fn success_note(reports: &[&PercolationReport]) -> Check {
    let parts: Vec<String> = reports
        .iter()
        .map(|r| format!("p = {}: {} of {} trials", r.p, r.per_trial.iter().filter(|t| t.success).count(), r.trials))
        .collect();
    Check::new("success rate (statistical, not asserted)", true).with_detail(parts.join("; "))
}

pub fn run(args: &PercolateArgs, cfg: &ConfigFile) -> Result<Outcome> {
    let regime = match (args.regime, cfg.regime.as_deref()) {
        (Some(r), _) => r,
        (None, Some("small")) => RegimeArg::Small,
        (None, Some("large")) => RegimeArg::Large,
        (None, Some(other)) => bail!("unknown regime {other:?}"),
        (None, None) => bail!("missing required setting --regime"),
    };
    let grid = pick(args.grid.clone(), &cfg.grid);
    if grid.as_ref().is_some_and(|g| g.is_empty()) {
        bail!("--grid needs at least one prime");
    }
    let r = Resolved {
        regime,
        p: if grid.is_some() { None } else { Some(require(pick(args.p, &cfg.p), "p")?) },
        grid,
        n: require(pick(args.n, &cfg.n), "n")?,
        m: require(pick(args.m, &cfg.m), "m")?,
        s: require(pick(args.s, &cfg.s), "s")?,
        trials: pick(args.trials, &cfg.trials).unwrap_or(200),
        seed: pick(args.seed, &cfg.seed).unwrap_or(0),
    };
    match (&r.grid, r.p) {
        (Some(grid), _) => run_grid(&r, grid.clone()),
        (None, Some(p)) => run_single(&r, p),
        (None, None) => unreachable!("p is required without a grid"),
    }
}

fn run_single(r: &Resolved, p: u64) -> Result<Outcome> {
    let (report, mu_chain) = run_one(r, p)?;
    let model = PercolationModel::with_exponent(AmbientSpace::new(p, r.n)?, r.s, r.seed)?;
    let size_concentration = chebyshev_size_check(&model, r.trials)?;
    let range = range_check(&[&report]);
    let note = success_note(&[&report]);
    let mut outcome = Outcome::new("percolate", r, Report {
        percolation: report,
        mu_chain,
        size_concentration,
    })?;
    outcome.check(range);
    if let Some(chain) = mu_chain {
        outcome.check(Check::new("expected hit cosets reach p^s/6", chain.holds).with_detail(format!(
            "mu = {:.6}, p^s/6 = {:.6}",
            chain.mu, chain.target
        )));
    }
    outcome.check(note);
    Ok(outcome)
}

fn run_grid(r: &Resolved, mut grid: Vec<u64>) -> Result<Outcome> {
    grid.sort_unstable();
    grid.dedup();
    let runs = grid.iter().map(|&p| run_one(r, p)).collect::<Result<Vec<_>>>()?;
    let reports: Vec<PercolationReport> = runs.iter().map(|(rep, _)| rep.clone()).collect();
    let rows: Vec<GridRow> = runs
        .iter()
        .map(|(rep, chain)| GridRow {
            p: rep.p,
            success_rate: rep.success_rate,
            size_window_pass: rep.size_window_pass,
            min_projection_mean: rep.min_projection_stats.mean,
            mu_chain_holds: chain.map(|c| c.holds),
        })
        .collect();
    let refs: Vec<&PercolationReport> = reports.iter().collect();
    let range = range_check(&refs);
    let note = success_note(&refs);
    let report = GridReport {
        non_decreasing: rows.windows(2).all(|w| w[0].success_rate <= w[1].success_rate),
        empirical_p0: empirical_threshold(&reports),
        rows,
    };
    let mut outcome = Outcome::new("percolate", r, report)?;
    outcome.check(range);
    outcome.check(note);
    Ok(outcome)
}
