use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use ffproj_core::projections::{
    size_exponent_censuses, exceptional_census_large, exceptional_census_small, CensusReport, Directions, Fraction,
};
use serde::Serialize;

use super::{load_set, write_sizes_csv};
use crate::config::{budget, pick, require, ConfigFile};
use crate::manifest::{Check, Outcome};

/// Count directions with small projections and compare with the proven bounds.
#[derive(Debug, Args)]
pub struct CensusArgs {
    /// Point set in ffpointset format.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Codimension of the projection directions.
    #[arg(long)]
    m: Option<usize>,
    /// Small-projection census: directions with at most N cosets.
    #[arg(long = "big-n", visible_alias = "N")]
    big_n: Option<u64>,
    /// Large-projection census: directions with at most delta p^m cosets.
    #[arg(long)]
    delta: Option<String>,
    /// Declared size exponent, |E| about p^s, for the size-exponent censuses.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Write per-direction projection sizes as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    input: PathBuf,
    m: usize,
    big_n: Option<u64>,
    delta: Option<String>,
    s: Option<f64>,
    t: Option<f64>,
    csv: Option<PathBuf>,
    budget: u64,
}

#[derive(Debug, Serialize)]
struct Report {
    set_size: u64,
    directions: u64,
    censuses: Vec<CensusReport>,
}

fn describe(r: &CensusReport) -> String {
    let hyp = if r.hypothesis_ok { "" } else { "; hypothesis not met, bound not asserted" };
    format!("observed {} against bound {:.6}{hyp}", r.observed, r.bound())
}

pub fn run(args: &CensusArgs, cfg: &ConfigFile) -> Result<Outcome> {
    let s = pick(args.s, &cfg.s);
    let r = Resolved {
        input: require(pick(args.input.clone(), &cfg.input), "input")?,
        m: require(pick(args.m, &cfg.m), "m")?,
        big_n: pick(args.big_n, &cfg.big_n),
        delta: pick(args.delta.clone(), &cfg.delta),
        s,
        t: pick(args.t, &cfg.t).or(s),
        csv: pick(args.csv.clone(), &cfg.csv),
        budget: budget(args.budget, cfg)?,
    };
    if r.big_n.is_none() && r.delta.is_none() && r.s.is_none() {
        bail!("give at least one of --big-n, --delta or --s");
    }
    let e = load_set(&r.input)?;
    let dirs = Directions::of_codim_with_budget(*e.space(), r.m, r.budget)?;
    let mut censuses = Vec::new();
    if let Some(n) = r.big_n {
        censuses.push(exceptional_census_small(&e, &dirs, n)?);
    }
    if let Some(d) = &r.delta {
        let delta: Fraction = d.parse()?;
        censuses.push(exceptional_census_large(&e, &dirs, delta)?);
    }
    if let (Some(s), Some(t)) = (r.s, r.t) {
        censuses.extend(size_exponent_censuses(&e, &dirs, s, t)?);
    }
    if let Some(path) = &r.csv {
        write_sizes_csv(path, dirs.subspaces(), &dirs.image_sizes(&e)?)?;
    }
    let checks: Vec<Check> = censuses
        .iter()
        .map(|c| {
            Check::new(
                format!("{} census ({})", serde_json::to_value(c.kind).unwrap().as_str().unwrap_or(""), c.parameter),
                !c.is_violation(),
            )
            .with_detail(describe(c))
        })
        .collect();
    let mut outcome = Outcome::new("census", &r, Report {
        set_size: e.len(),
        directions: dirs.len() as u64,
        censuses,
    })?;
    for c in checks {
        outcome.check(c);
    }
    Ok(outcome)
}
