use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use ffproj_core::energy::{energy, verify_energy_identity, verify_energy_identity_fourier, PlaneFamily};
use serde::Serialize;

use super::load_set;
use crate::config::{budget, pick, require, ConfigFile};
use crate::manifest::{Check, Outcome};

/// Energy over all m-dimensional planes, computed directly and spectrally.
#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Dimension of the planes.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    input: PathBuf,
    m: usize,
    budget: u64,
}

#[derive(Debug, Serialize)]
struct Report {
    set_size: u64,
    planes: u64,
    energy: u128,
    closed_form: u128,
    spectral: f64,
    spectral_grouped: f64,
    max_abs_diff: f64,
    /// Energy over the lines x + y = k, in the plane only.
    #[serde(skip_serializing_if = "Option::is_none")]
    sum_line_energy: Option<u128>,
}

pub fn run(args: &EnergyArgs, cfg: &ConfigFile) -> Result<Outcome> {
    let r = Resolved {
        input: require(pick(args.input.clone(), &cfg.input), "input")?,
        m: require(pick(args.m, &cfg.m), "m")?,
        budget: budget(args.budget, cfg)?,
    };
    let e = load_set(&r.input)?;
    let space = *e.space();
    let family = PlaneFamily::all_with_budget(space, r.m, r.budget)?;
    let direct = energy(&e, &family)?;
    let identity = verify_energy_identity(&e, r.m)?;
    let spectral = verify_energy_identity_fourier(&e, r.m)?;
    let sum_line_energy = if space.n() == 2 {
        Some(energy(&e, &PlaneFamily::sum_lines(space)?)?)
    } else {
        None
    };
    let mut outcome = Outcome::new("energy", &r, Report {
        set_size: e.len(),
        planes: family.len() as u64,
        energy: direct,
        closed_form: identity.rhs,
        spectral: spectral.lhs,
        spectral_grouped: spectral.grouped,
        max_abs_diff: spectral.max_abs_diff,
        sum_line_energy,
    })?;
    outcome.check(
        Check::new("energy equals the closed form", direct == identity.rhs)
            .with_detail(format!("{direct} vs {}", identity.rhs)),
    );
    outcome.check(
        Check::new("spectral energy matches", spectral.ok)
            .with_detail(format!("max abs difference {:e}", spectral.max_abs_diff)),
    );
    Ok(outcome)
}
