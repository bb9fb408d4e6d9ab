use anyhow::Result;
use clap::Args;
use ffproj_core::subspaces::{affine_planes_with_budget, gaussian_binomial, grassmannian_with_budget};
use ffproj_core::AmbientSpace;
use serde::Serialize;

use crate::config::{budget, pick, require, ConfigFile};
use crate::manifest::{Check, Outcome};

/// Count (and optionally list) the subspaces G(n,m) or planes A(n,m).
#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Affine planes instead of linear subspaces.
    #[arg(long)]
    affine: bool,
    /// Print every item, not just the count.
    #[arg(long)]
    list: bool,
    /// Emit the JSON envelope instead of plain text.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    p: u64,
    n: usize,
    m: usize,
    affine: bool,
    list: bool,
    budget: u64,
}

#[derive(Debug, Serialize)]
struct Report {
    kind: &'static str,
    count: u64,
    formula: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    items: Vec<String>,
}

pub fn run(args: &EnumerateArgs, cfg: &ConfigFile) -> Result<Outcome> {
    let r = Resolved {
        p: require(pick(args.p, &cfg.p), "p")?,
        n: require(pick(args.n, &cfg.n), "n")?,
        m: require(pick(args.m, &cfg.m), "m")?,
        affine: args.affine || cfg.affine.unwrap_or(false),
        list: args.list || cfg.list.unwrap_or(false),
        budget: budget(args.budget, cfg)?,
    };
    let space = AmbientSpace::new(r.p, r.n)?;
    let g = gaussian_binomial(r.n, r.m, r.p)?;
    let mut items = Vec::new();
    let (kind, count, formula) = if r.affine {
        let planes = affine_planes_with_budget(space, r.m, r.budget)?;
        let formula = g.value() * space.pow(r.n - r.m);
        let mut count = 0u64;
        for plane in planes {
            count += 1;
            if r.list {
                items.push(format!("rep={} {}", plane.rep(), plane.direction()));
            }
        }
        ("affine_planes", count, formula.to_string())
    } else {
        let mut count = 0u64;
        for w in grassmannian_with_budget(space, r.m, r.budget)? {
            count += 1;
            if r.list {
                items.push(w.to_text());
            }
        }
        ("subspaces", count, g.to_string())
    };
    let text = if args.json {
        None
    } else {
        let mut t = format!("{count}\n");
        for item in &items {
            t.push_str(item);
            if !item.ends_with('\n') {
                t.push('\n');
            }
        }
        Some(t)
    };
    let mut outcome = Outcome::new("enumerate", &r, Report {
        kind,
        count,
        formula: formula.clone(),
        items,
    })?;
    outcome.check(
        Check::new("count matches the Gaussian binomial formula", count.to_string() == formula)
            .with_detail(format!("enumerated {count}, formula {formula}")),
    );
    outcome.text = text;
    Ok(outcome)
}
