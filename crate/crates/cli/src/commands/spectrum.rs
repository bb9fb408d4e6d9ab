use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use ffproj_core::fourier::{
    dft, fourier_projection_bounds, paraboloid, plancherel_check, sphere, sphere_size_window, DecayProjectionReport,
    DecayReport, IdentityCheck, SalemProfile,
};
use ffproj_core::AmbientSpace;
use serde::Serialize;

use super::load_set;
use crate::config::{pick, require, ConfigFile};
use crate::manifest::{Check, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Paraboloid,
    Sphere,
}

/// Fourier decay of a set, with optional projection bounds for a decay profile.
#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, conflicts_with = "builtin")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// Sphere radius.
    #[arg(long)]
    r: Option<u32>,
    /// Decay constant C of the profile |E^(xi)| <= C |E|^alpha.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Codimension for the projection bounds.
    #[arg(long)]
    m: Option<usize>,
    /// Write the full spectrum as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    input: Option<PathBuf>,
    builtin: Option<Builtin>,
    p: Option<u64>,
    n: Option<usize>,
    r: Option<u32>,
    c: Option<f64>,
    alpha: Option<f64>,
    m: Option<usize>,
    csv: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Report {
    set_size: u64,
    plancherel: IdentityCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay: Option<DecayReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sphere_size_window: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    projection_bounds: Option<DecayProjectionReport>,
}

pub fn run(args: &SpectrumArgs, cfg: &ConfigFile) -> Result<Outcome> {
    let builtin = match (args.builtin, cfg.builtin.as_deref()) {
        (Some(b), _) => Some(b),
        (None, Some(name)) => Some(Builtin::from_str(name, true).map_err(|e| anyhow::anyhow!(e))?),
        (None, None) => None,
    };
    let r = Resolved {
        input: if builtin.is_some() { None } else { pick(args.input.clone(), &cfg.input) },
        builtin,
        p: pick(args.p, &cfg.p),
        n: pick(args.n, &cfg.n),
        r: pick(args.r, &cfg.r),
        c: pick(args.c, &cfg.c),
        alpha: pick(args.alpha, &cfg.alpha),
        m: pick(args.m, &cfg.m),
        csv: pick(args.csv.clone(), &cfg.csv),
    };
    let mut window = None;
    let e = match (&r.input, r.builtin) {
        (Some(path), _) => load_set(path)?,
        (None, Some(b)) => {
            let space = AmbientSpace::new(require(r.p, "p")?, require(r.n, "n")?)?;
            match b {
                Builtin::Paraboloid => paraboloid(space)?,
                Builtin::Sphere => {
                    window = Some(sphere_size_window(&space));
                    sphere(space, r.r.unwrap_or(1))?
                }
            }
        }
        (None, None) => bail!("give --input or --builtin"),
    };
    let spectrum = dft(&e)?;
    if let Some(path) = &r.csv {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        spectrum.write_csv(std::io::BufWriter::new(file))?;
    }
    let plancherel = plancherel_check(&spectrum);
    let decay = DecayReport::from_spectrum(&spectrum).ok();
    let projection_bounds = match (r.c, r.alpha, r.m) {
        (Some(c), Some(alpha), Some(m)) => Some(fourier_projection_bounds(&e, SalemProfile::new(c, alpha)?, m)?),
        (None, None, None) => None,
        _ => bail!("projection bounds need all of --c, --alpha and --m"),
    };
    let mut checks = vec![Check::new("Plancherel", plancherel.ok).with_detail(format!(
        "{} vs {}",
        plancherel.lhs, plancherel.rhs
    ))];
    if let Some(d) = &decay {
        checks.push(Check::new("largest coefficient meets the Plancherel lower bound", d.lower_bound_ok));
    }
    if let Some(b) = &projection_bounds {
        let detail = format!(
            "case {:?}: min projection {} against {:.6}{}",
            b.case,
            b.observed_min,
            b.predicted_min,
            if b.profile_satisfied { "" } else { "; profile not satisfied, not asserted" }
        );
        checks.push(Check::new("decay projection bound", !b.profile_satisfied || b.conclusion_ok).with_detail(detail));
    }
    let mut outcome = Outcome::new("spectrum", &r, Report {
        set_size: e.len(),
        plancherel,
        decay,
        sphere_size_window: window,
        projection_bounds,
    })?;
    for c in checks {
        outcome.check(c);
    }
    Ok(outcome)
}
