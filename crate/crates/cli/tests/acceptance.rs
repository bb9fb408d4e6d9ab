//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ffproj_core::energy::{energy, energy_closed_form, verify_energy_identity_fourier, PlaneFamily};
use ffproj_core::fourier::{character_sum, dft, fourier_projection_bounds, paraboloid, subspace_plancherel, SalemProfile};
use ffproj_core::projections::{coset_profile, exceptional_census_large, exceptional_census_small, project, Directions, Fraction};
use ffproj_core::random_sets::{percolation_sample, verify_large_regime, verify_small_regime, PercolationModel};
use ffproj_core::subspaces::{
    count_subspaces_containing, count_subspaces_exhaustive, count_subspaces_with_perp_containing, gaussian_binomial,
    grassmannian, verify_pascal_identities,
};
use ffproj_core::{AmbientSpace, PointIndex, PointSet, Subspace};
use num_bigint::BigUint;

type Check = Result<String, String>;

/// Title, time limit in seconds, and the check itself.
type Criterion = (&'static str, Option<u64>, fn() -> Check);

fn space(p: u64, n: usize) -> AmbientSpace {
    AmbientSpace::new(p, n).expect("valid space")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_subsets(s: AmbientSpace) -> impl Iterator<Item = PointSet> {
    let q = s.point_count();
    (0u64..1 << q).map(move |mask| PointSet::from_indices(s, (0..q).filter(|i| mask >> i & 1 == 1).map(PointIndex)).unwrap())
}

/// `count` seeded samples with densities cycling through 0.1, 0.2, ..., 0.9.
fn random_sets(s: AmbientSpace, count: u64, seed: u64) -> impl Iterator<Item = PointSet> {
    (0..count).map(move |t| {
        let delta = ((t % 9) + 1) as f64 / 10.0;
        percolation_sample(&PercolationModel::new(s, delta, seed).unwrap(), t)
    })
}

fn all_subspaces(s: AmbientSpace) -> Vec<Subspace> {
    (0..=s.n()).flat_map(|m| grassmannian(s, m).unwrap()).collect()
}

fn gaussian_counts() -> Check {
    let mut cases = 0;
    for p in [2u64, 3, 5] {
        for n in 1..=4 {
            let s = space(p, n);
            for m in 0..=n {
                let listed = grassmannian(s, m).map_err(|e| e.to_string())?.count() as u64;
                let formula = gaussian_binomial(n, m, p).map_err(|e| e.to_string())?;
                ensure(formula.to_u64() == Some(listed), || format!("p={p} n={n} m={m}: {formula} vs {listed}"))?;
                ensure(m == 0 || verify_pascal_identities(n, m, p), || format!("identities fail at p={p} n={n} m={m}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (p,n,m) cases"))
}

fn containment_counts() -> Check {
    let mut cases = 0;
    for p in [2u64, 3] {
        for n in [2usize, 3] {
            let s = space(p, n);
            for m in 0..=n {
                for xi in s.points().filter(|x| !x.is_zero()) {
                    let (containing, perp) = count_subspaces_exhaustive(&s, &xi, m).map_err(|e| e.to_string())?;
                    let a = count_subspaces_containing(&s, &xi, m).map_err(|e| e.to_string())?;
                    let b = count_subspaces_with_perp_containing(&s, &xi, m).map_err(|e| e.to_string())?;
                    ensure(a == BigUint::from(containing) && b == BigUint::from(perp), || {
                        format!("p={p} n={n} m={m} xi={xi:?}: ({a},{b}) vs ({containing},{perp})")
                    })?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} (xi,m) cases"))
}

fn check_energy(e: &PointSet, fam: &PlaneFamily, m: usize) -> Result<(), String> {
    let direct = energy(e, fam).map_err(|x| x.to_string())?;
    let closed = energy_closed_form(e.space(), e.len(), m).map_err(|x| x.to_string())?;
    ensure(direct == closed, || format!("|E|={} m={m}: {direct} vs {closed}", e.len()))?;
    let spectral = verify_energy_identity_fourier(e, m).map_err(|x| x.to_string())?;
    ensure(spectral.ok, || format!("spectral route off by {} at |E|={} m={m}", spectral.max_abs_diff, e.len()))
}

fn energy_identity() -> Check {
    let s = space(3, 2);
    let fam = PlaneFamily::all(s, 1).unwrap();
    let mut sets = 0;
    for e in all_subsets(s) {
        check_energy(&e, &fam, 1)?;
        sets += 1;
    }
    for (p, n) in [(5u64, 2usize), (2, 3), (3, 3)] {
        let s = space(p, n);
        for m in 1..=n {
            let fam = PlaneFamily::all(s, m).unwrap();
            for e in random_sets(s, 1000, 31 + m as u64) {
                check_energy(&e, &fam, m)?;
                sets += 1;
            }
        }
    }
    Ok(format!("{sets} sets"))
}

fn plancherel_and_characters() -> Check {
    let mut checks = 0u64;
    for p in [2u64, 3, 5] {
        for n in [2usize, 3] {
            let s = space(p, n);
            let subspaces = all_subspaces(s);
            let sets: Vec<PointSet> =
                if s.point_count() <= 9 { all_subsets(s).collect() } else { random_sets(s, 200, 3).collect() };
            for e in &sets {
                let spec = dft(e).map_err(|x| x.to_string())?;
                for w in &subspaces {
                    let r = subspace_plancherel(e, w, &spec).map_err(|x| x.to_string())?;
                    ensure(r.ok, || format!("p={p} n={n} |E|={}: {} vs {}", e.len(), r.combinatorial, r.spectral))?;
                    checks += 1;
                }
            }
            for v in &subspaces {
                let per = v.perp().size() as f64;
                for x in s.points() {
                    let sum = character_sum(v, &x).map_err(|e| e.to_string())?;
                    let want = if v.contains(&x) { per } else { 0.0 };
                    ensure((sum.re - want).abs() <= 1e-9 * per && sum.im.abs() <= 1e-9 * per, || {
                        format!("character sum {sum} at p={p} n={n}, expected {want}")
                    })?;
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} identities"))
}

fn census_bounds() -> Check {
    let deltas: Vec<Fraction> = (1..=9).map(|k| Fraction::new(k, 10).unwrap()).collect();
    let mut reports = 0u64;
    let mut active = 0u64;
    for (p, n, m) in [(3u64, 2usize, 1usize), (5, 2, 1), (3, 3, 1), (3, 3, 2)] {
        let s = space(p, n);
        let dirs = Directions::of_codim(s, m).unwrap();
        for e in random_sets(s, 1000, 100 + p * 10 + (n * m) as u64) {
            for big_n in (1..).take_while(|k| 2 * k < e.len()) {
                let r = exceptional_census_small(&e, &dirs, big_n).map_err(|x| x.to_string())?;
                ensure(!r.is_violation(), || format!("{r:?}"))?;
                reports += 1;
                active += u64::from(r.hypothesis_ok);
            }
            for &delta in &deltas {
                let r = exceptional_census_large(&e, &dirs, delta).map_err(|x| x.to_string())?;
                ensure(!r.is_violation(), || format!("{r:?}"))?;
                reports += 1;
                active += u64::from(r.hypothesis_ok);
            }
        }
    }
    ensure(active > 0, || "no census met its hypothesis".into())?;
    Ok(format!("{reports} censuses, {active} under hypothesis, 0 violations"))
}

fn cauchy_schwarz_sweep() -> Check {
    let s = space(3, 2);
    let subspaces = all_subspaces(s);
    let mut pairs = 0;
    for e in all_subsets(s) {
        for w in &subspaces {
            let img = project(&e, w).map_err(|x| x.to_string())?;
            let prof = coset_profile(&e, w).map_err(|x| x.to_string())?;
            let cap = e.len().min(s.pow(w.codim()));
            ensure(prof.cauchy_schwarz_holds(), || format!("Cauchy-Schwarz fails for |E|={} dim W={}", e.len(), w.dim()))?;
            ensure(img.size() <= cap && img.size() == prof.support(), || {
                format!("projection size {} exceeds {cap}", img.size())
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (set, direction) pairs"))
}

fn paraboloid_decay() -> Check {
    let profile = SalemProfile::new(1.0, 0.5).unwrap();
    let mut runs = 0;
    for p in [3u64, 5, 7, 11, 13] {
        for n in [2usize, 3] {
            let s = space(p, n);
            let par = paraboloid(s).map_err(|x| x.to_string())?;
            let max = dft(&par).map_err(|x| x.to_string())?.max_nonzero().map_or(0.0, |m| m.0);
            let want = (p as f64).powf((n as f64 - 1.0) / 2.0);
            ensure((max - want).abs() <= 1e-6 * want, || format!("p={p} n={n}: max {max} vs {want}"))?;
            for m in 1..n {
                let r = fourier_projection_bounds(&par, profile, m).map_err(|x| x.to_string())?;
                ensure(r.profile_satisfied && r.conclusion_ok, || {
                    format!("p={p} n={n} m={m}: case {:?} predicted {} observed {}", r.case, r.predicted_min, r.observed_min)
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} direction sweeps"))
}

fn small_regime() -> Check {
    let mut rates = Vec::new();
    for p in [7u64, 13, 31] {
        let r = verify_small_regime(p, 2, 1, 1.0, 200, 2024).map_err(|x| x.to_string())?;
        rates.push((p, r.success_rate));
    }
    let monotone = rates.windows(2).all(|w| w[0].1 <= w[1].1);
    let trend: Vec<String> = rates.iter().map(|(p, r)| format!("p={p}:{r:.3}")).collect();
    let detail = format!("{} non-decreasing={monotone}", trend.join(" "));
    ensure(rates[2].1 >= 0.95, || detail.clone())?;
    Ok(detail)
}

fn large_regime() -> Check {
    let r = verify_large_regime(31, 2, 1, 1.7, 200, 2024).map_err(|x| x.to_string())?;
    let detail = format!("success {:.3}, plane miss rate {:.2e}", r.success_rate, r.plane_miss_rate.unwrap_or(f64::NAN));
    ensure(r.success_rate >= 0.95, || detail.clone())?;
    Ok(detail)
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ffproj"))
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("FFPROJ_BUDGET")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    Ok(text.lines().filter(|l| !l.contains("\"wall_clock_seconds\"")).collect::<Vec<_>>().join("\n"))
}

fn determinism() -> Check {
    let commands: [&[&str]; 7] = [
        &["enumerate", "--p", "3", "--n", "3", "--m", "1", "--list", "--json"],
        &["census", "--input", "tests/data/scattered_f5.ffp", "--m", "1", "--big-n", "2", "--delta", "1/2", "--s", "1.2"],
        &["verify", "--p", "2,3", "--n", "2,3", "--seed", "11"],
        &["percolate", "--regime", "small", "--p", "13", "--n", "2", "--m", "1", "--s", "1", "--trials", "50", "--seed", "9"],
        &["spectrum", "--builtin", "paraboloid", "--p", "7", "--n", "3", "--c", "1", "--alpha", "0.5", "--m", "1"],
        &["energy", "--input", "tests/data/full_f3_3.ffp", "--m", "2"],
        &["project", "--input", "tests/data/scattered_f5.ffp", "--m", "1"],
    ];
    for args in commands {
        let first = run_cli(args)?;
        let second = run_cli(args)?;
        ensure(first == second, || format!("{} output differs between runs", args[0]))?;
    }
    Ok(format!("{} commands rerun", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Gaussian binomials match RREF enumeration, recurrences hold", Some(10), gaussian_counts),
        ("containment counts match exhaustive membership", Some(10), containment_counts),
        ("energy identity exact, spectral route within 1e-9", Some(60), energy_identity),
        ("subspace Plancherel and character sums", Some(60), plancherel_and_characters),
        ("exceptional-direction censuses within bounds", Some(300), census_bounds),
        ("Cauchy-Schwarz and min(|E|, p^m) over all of F_3^2", None, cauchy_schwarz_sweep),
        ("paraboloid Salem decay and projection cases", Some(120), paraboloid_decay),
        ("small-regime percolation at p=31", Some(120), small_regime),
        ("large-regime percolation at p=31", Some(120), large_regime),
        ("reruns are byte-identical", None, determinism),
    ];
    let mut failed = 0;
    for (i, (title, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let slow = limit.is_some_and(|l| elapsed > Duration::from_secs(l));
        let (ok, detail) = match result {
            Ok(d) if slow => (false, format!("{d}; over the {}s limit", limit.unwrap())),
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] {:>2} {title} ({:.2}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria fail");
        ExitCode::FAILURE
    }
}
