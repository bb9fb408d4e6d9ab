use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use ffproj_core::projections::{project, Directions};
use ffproj_core::Subspace;
use serde::Serialize;

use super::{basis_text, load_set, write_sizes_csv};
use crate::config::{budget, pick, ConfigFile};
use crate::manifest::{Check, Outcome};

/// Project a set along one subspace, or along every subspace of codimension m.
#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Serialized subspace W to project along.
    #[arg(long)]
    subspace: Option<PathBuf>,
    /// Codimension of the directions to sweep when no subspace is given.
    #[arg(long)]
    m: Option<usize>,
    /// Write per-direction projection sizes as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    input: PathBuf,
    subspace: Option<PathBuf>,
    m: Option<usize>,
    csv: Option<PathBuf>,
    budget: u64,
}

#[derive(Debug, Serialize)]
struct Single {
    direction: String,
    codim: usize,
    size: u64,
    full: bool,
    cosets: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Sweep {
    codim: usize,
    directions: u64,
    min: u64,
    max: u64,
    full: u64,
    sizes: Vec<u64>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Report {
    Single(Single),
    Sweep(Sweep),
}

pub fn run(args: &ProjectArgs, cfg: &ConfigFile) -> Result<Outcome> {
    let r = Resolved {
        input: pick(args.input.clone(), &cfg.input).context("missing required setting --input")?,
        subspace: pick(args.subspace.clone(), &cfg.subspace),
        m: pick(args.m, &cfg.m),
        csv: pick(args.csv.clone(), &cfg.csv),
        budget: budget(args.budget, cfg)?,
    };
    let e = load_set(&r.input)?;
    let cap = |m: usize| e.len().min(e.space().pow(m));
    let (report, worst) = if let Some(path) = &r.subspace {
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let w = Subspace::read_from(std::io::BufReader::new(file))?;
        let img = project(&e, &w)?;
        let cosets = img.planes().iter().map(|pl| format!("{} + W", pl.rep())).collect();
        let single = Single {
            direction: basis_text(&w),
            codim: w.codim(),
            size: img.size(),
            full: img.is_full(),
            cosets,
        };
        let ok = img.size() <= cap(w.codim());
        (Report::Single(single), ok)
    } else if let Some(m) = r.m {
        let dirs = Directions::of_codim_with_budget(*e.space(), m, r.budget)?;
        let sizes = dirs.image_sizes(&e)?;
        if let Some(path) = &r.csv {
            write_sizes_csv(path, dirs.subspaces(), &sizes)?;
        }
        let ok = sizes.iter().all(|&s| s <= cap(m));
        let sweep = Sweep {
            codim: m,
            directions: sizes.len() as u64,
            min: sizes.iter().copied().min().unwrap_or(0),
            max: sizes.iter().copied().max().unwrap_or(0),
            full: sizes.iter().filter(|&&s| s == e.space().pow(m)).count() as u64,
            sizes,
        };
        (Report::Sweep(sweep), ok)
    } else {
        bail!("give --subspace or --m");
    };
    let mut outcome = Outcome::new("project", &r, report)?;
    outcome.check(Check::new("projection sizes at most min(|E|, p^m)", worst));
    Ok(outcome)
}
