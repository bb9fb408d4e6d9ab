use anyhow::Result;
use clap::{Args, ValueEnum};
use ffproj_core::energy::{energy_closed_form, verify_energy_identity, verify_energy_identity_fourier};
use ffproj_core::fourier::{character_sum, dft, subspace_plancherel};
use ffproj_core::projections::{coset_profile, project, project_onto};
use ffproj_core::random_sets::{percolation_sample, PercolationModel};
use ffproj_core::subspaces::{
    count_subspaces_containing, count_subspaces_with_perp_containing, gaussian_binomial, grassmannian_with_budget,
    verify_pascal_identities,
};
use ffproj_core::{AmbientSpace, PointSet, Subspace};
use serde::Serialize;

use crate::config::{budget, pick, ConfigFile};
use crate::manifest::{Check, Outcome};

/// Deliberate defects, to show the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Adds one to every Gaussian binomial used as an expectation.
    GaussianOffByOne,
    /// Drops the squared term of the energy closed form.
    EnergyClosedForm,
}

/// Run every exact identity over a grid of fields and dimensions.
#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Primes to test (comma separated).
    #[arg(long = "p", value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// Dimensions to test (comma separated).
    #[arg(long = "n", value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Random sets per instance.
    #[arg(long)]
    sets: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    inject_fault: Option<Fault>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Resolved {
    primes: Vec<u64>,
    dims: Vec<usize>,
    sets: u64,
    seed: u64,
    inject_fault: Option<Fault>,
    budget: u64,
}

/// One identity family: how many instances ran and the first failure.
#[derive(Debug, Default, Serialize)]
struct Family {
    name: &'static str,
    instances: u64,
    failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
}

impl Family {
    fn named(name: &'static str) -> Self {
        Family {
            name,
            ..Family::default()
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct Report {
    instances: Vec<(u64, usize)>,
    families: Vec<Family>,
}

struct Suite {
    fault: Option<Fault>,
    budget: u64,
    gauss: Family,
    pascal: Family,
    containment: Family,
    duality: Family,
    energy: Family,
    energy_fourier: Family,
    subspace_plancherel: Family,
    character_sums: Family,
    cauchy_schwarz: Family,
}

fn fits(v: Option<u64>) -> Result<u64> {
    v.ok_or_else(|| anyhow::anyhow!("count does not fit 64 bits"))
}

fn set_text(e: &PointSet) -> String {
    let pts: Vec<String> = e.points().map(|x| x.to_string()).collect();
    format!("{{{}}}", pts.join(" "))
}

impl Suite {
    fn gauss(&self, n: usize, m: usize, p: u64) -> Result<u64> {
        let g = fits(gaussian_binomial(n, m, p)?.to_u64())?;
        Ok(g + u64::from(self.fault == Some(Fault::GaussianOffByOne)))
    }

    fn run_instance(&mut self, p: u64, n: usize, sets: &[PointSet]) -> Result<()> {
        let space = AmbientSpace::new(p, n)?;
        for m in 0..=n {
            let subspaces: Vec<Subspace> = grassmannian_with_budget(space, m, self.budget)?.collect();
            let expected = self.gauss(n, m, p)?;
            self.gauss.record(subspaces.len() as u64 == expected, || {
                format!("p={p} n={n} m={m}: enumerated {}, formula {expected}", subspaces.len())
            });
            if m >= 1 {
                self.pascal
                    .record(verify_pascal_identities(n, m, p), || format!("p={p} n={n} m={m}"));
            }
            for xi in space.points().filter(|x| !x.is_zero()) {
                let containing = subspaces.iter().filter(|w| w.contains(&xi)).count() as u64;
                let perp = subspaces.iter().filter(|w| w.perp().contains(&xi)).count() as u64;
                let shift = u64::from(self.fault == Some(Fault::GaussianOffByOne));
                let want_c = fits(u64::try_from(&count_subspaces_containing(&space, &xi, m)?).ok())? + shift;
                let want_p = fits(u64::try_from(&count_subspaces_with_perp_containing(&space, &xi, m)?).ok())? + shift;
                self.containment.record(containing == want_c && perp == want_p, || {
                    format!("p={p} n={n} m={m} xi={xi}: counted {containing}/{perp}, formula {want_c}/{want_p}")
                });
            }
            for w in &subspaces {
                let back = w.perp().perp();
                let ok = &back == w && w.dim() + w.perp().dim() == n;
                let proj_ok = sets.iter().all(|e| {
                    project_onto(e, w).map(|a| a.cosets().to_vec()).ok()
                        == project(e, &w.perp()).map(|b| b.cosets().to_vec()).ok()
                });
                self.duality.record(ok && proj_ok, || format!("p={p} n={n} W={w}"));
                for x in space.points() {
                    let sum = character_sum(w, &x)?;
                    let size = w.perp().size() as f64;
                    let want = if w.contains(&x) { size } else { 0.0 };
                    self.character_sums.record((sum.re - want).abs() + sum.im.abs() <= 1e-9 * size, || {
                        format!("p={p} n={n} V={w} x={x}: sum {sum}")
                    });
                }
            }
            for e in sets {
                let spectrum = dft(e)?;
                for w in &subspaces {
                    let r = subspace_plancherel(e, w, &spectrum)?;
                    self.subspace_plancherel.record(r.ok, || {
                        format!("p={p} n={n} W={w} E={}: {} vs {}", set_text(e), r.combinatorial, r.spectral)
                    });
                    let prof = coset_profile(e, w)?;
                    self.cauchy_schwarz
                        .record(prof.cauchy_schwarz_holds(), || format!("p={p} n={n} W={w} E={}", set_text(e)));
                }
                if m >= 1 {
                    let id = verify_energy_identity(e, m)?;
                    let mut rhs = id.rhs;
                    if self.fault == Some(Fault::EnergyClosedForm) {
                        let g = u128::from(fits(gaussian_binomial(n - 1, m - 1, p)?.to_u64())?);
                        rhs -= u128::from(e.len()).pow(2) * g;
                    }
                    debug_assert_eq!(id.rhs, energy_closed_form(&space, e.len(), m)?);
                    self.energy.record(id.lhs == rhs, || {
                        format!("p={p} n={n} m={m} E={}: energy {}, closed form {rhs}", set_text(e), id.lhs)
                    });
                    let f = verify_energy_identity_fourier(e, m)?;
                    self.energy_fourier.record(f.ok, || {
                        format!("p={p} n={n} m={m} E={}: spectral {} vs {}", set_text(e), f.lhs, f.rhs)
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn run(args: &VerifyArgs, cfg: &ConfigFile) -> Result<Outcome> {
    let r = Resolved {
        primes: pick(args.primes.clone(), &cfg.primes).unwrap_or_else(|| vec![2, 3, 5]),
        dims: pick(args.dims.clone(), &cfg.dims).unwrap_or_else(|| vec![1, 2, 3]),
        sets: pick(args.sets, &cfg.sets).unwrap_or(3),
        seed: pick(args.seed, &cfg.seed).unwrap_or(0),
        inject_fault: match (args.inject_fault, cfg.inject_fault.as_deref()) {
            (Some(f), _) => Some(f),
            (None, Some(name)) => Some(Fault::from_str(name, true).map_err(|e| anyhow::anyhow!(e))?),
            (None, None) => None,
        },
        budget: budget(args.budget, cfg)?,
    };
    let mut suite = Suite {
        fault: r.inject_fault,
        budget: r.budget,
        gauss: Family::named("Gaussian binomial equals the enumerated count"),
        pascal: Family::named("Pascal identities and symmetry"),
        containment: Family::named("subspaces containing a vector"),
        duality: Family::named("Per(Per(W)) = W and P_V = pi^Per(V)"),
        energy: Family::named("energy over all planes, closed form"),
        energy_fourier: Family::named("energy over all planes, spectral"),
        subspace_plancherel: Family::named("coset second moments from the spectrum"),
        character_sums: Family::named("character sums over Per(V)"),
        cauchy_schwarz: Family::named("Cauchy-Schwarz for coset counts"),
    };
    let mut instances = Vec::new();
    for &p in &r.primes {
        for &n in &r.dims {
            let space = AmbientSpace::new(p, n)?;
            let model = PercolationModel::new(space, 0.5, r.seed)?;
            let mut sets: Vec<PointSet> = (0..r.sets).map(|t| percolation_sample(&model, t)).collect();
            sets.push(PointSet::empty(space));
            suite.run_instance(p, n, &sets)?;
            instances.push((p, n));
        }
    }
    let families = vec![
        suite.gauss,
        suite.pascal,
        suite.containment,
        suite.duality,
        suite.energy,
        suite.energy_fourier,
        suite.subspace_plancherel,
        suite.character_sums,
        suite.cauchy_schwarz,
    ];
    let checks: Vec<Check> = families
        .iter()
        .map(|f| {
            let check = Check::new(f.name, f.failures == 0);
            match &f.witness {
                Some(w) => check.with_detail(format!("{} of {} failed; first: {w}", f.failures, f.instances)),
                None => check.with_detail(format!("{} instances", f.instances)),
            }
        })
        .collect();
    let mut outcome = Outcome::new("verify", &r, Report { instances, families })?;
    for c in checks {
        outcome.check(c);
    }
    Ok(outcome)
}
