//! Invariants over randomly generated sets and subspaces.

use ffproj_core::energy::{energy, energy_closed_form, direction_energy_bounds, verify_energy_identity_fourier, PlaneFamily};
use ffproj_core::fourier::{dft, plancherel_check, subspace_plancherel, DecayReport};
use ffproj_core::projections::{coset_profile, exceptional_census_large, exceptional_census_small, Directions, Fraction};
use ffproj_core::subspaces::{count_subspaces_containing, count_subspaces_exhaustive, count_subspaces_with_perp_containing, grassmannian};
use ffproj_core::{project, project_onto, AmbientSpace, FpVector, PointIndex, PointSet, Subspace};
use num_bigint::BigUint;
use proptest::prelude::*;

fn small_space() -> impl Strategy<Value = AmbientSpace> {
    prop::sample::select(vec![(2u64, 2usize), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2)])
        .prop_map(|(p, n)| AmbientSpace::new(p, n).unwrap())
}

fn set_in(s: AmbientSpace) -> impl Strategy<Value = PointSet> {
    prop::collection::vec(any::<bool>(), s.point_count() as usize).prop_map(move |bits| {
        PointSet::from_indices(
            s,
            bits.iter().enumerate().filter(|b| *b.1).map(|(i, _)| PointIndex(i as u64)),
        )
        .unwrap()
    })
}

fn space_and_set() -> impl Strategy<Value = PointSet> {
    small_space().prop_flat_map(set_in)
}

fn subspace_in(s: AmbientSpace) -> impl Strategy<Value = Subspace> {
    let n = s.n();
    prop::collection::vec(prop::collection::vec(0..s.p(), n), 0..=n)
        .prop_map(move |rows| {
            let vs: Vec<FpVector> = rows.iter().map(|r| s.vector(r).unwrap()).collect();
            Subspace::span(s, &vs).unwrap()
        })
}

fn set_and_subspace() -> impl Strategy<Value = (PointSet, Subspace)> {
    small_space().prop_flat_map(|s| (set_in(s), subspace_in(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_size_bounds((e, w) in set_and_subspace()) {
        let img = project(&e, &w).unwrap();
        let cosets = e.space().pow(w.codim());
        prop_assert!(img.size() <= e.len().min(cosets));
        prop_assert_eq!(img.size() == 0, e.is_empty());
        let prof = coset_profile(&e, &w).unwrap();
        prop_assert_eq!(prof.support(), img.size());
        prop_assert!(prof.cauchy_schwarz_holds());
        prop_assert_eq!(prof.counts().iter().map(|c| c.1).sum::<u64>(), e.len());
    }

    #[test]
    fn duality((e, v) in set_and_subspace()) {
        prop_assert_eq!(v.perp().perp(), v.clone());
        prop_assert_eq!(v.dim() + v.perp().dim(), v.space().n());
        let onto = project_onto(&e, &v).unwrap();
        let along = project(&e, &v.perp()).unwrap();
        prop_assert_eq!(onto.cosets(), along.cosets());
    }

    #[test]
    fn plancherel_and_subspace_plancherel((e, w) in set_and_subspace()) {
        let spec = dft(&e).unwrap();
        prop_assert_eq!(spec.value(PointIndex(0)).re, e.len() as f64);
        prop_assert!(plancherel_check(&spec).ok);
        prop_assert!(subspace_plancherel(&e, &w, &spec).unwrap().ok);
    }

    #[test]
    fn plancherel_lower_bound(e in space_and_set()) {
        prop_assume!(!e.is_empty() && !e.is_full());
        let r = DecayReport::from_spectrum(&dft(&e).unwrap()).unwrap();
        prop_assert!(r.lower_bound_ok);
    }

    #[test]
    fn energy_identity_both_ways(e in space_and_set(), m in 1usize..=4) {
        let s = *e.space();
        prop_assume!(m <= s.n());
        let fam = PlaneFamily::all(s, m).unwrap();
        prop_assert_eq!(energy(&e, &fam).unwrap(), energy_closed_form(&s, e.len(), m).unwrap());
        prop_assert!(verify_energy_identity_fourier(&e, m).unwrap().ok);
    }

    #[test]
    fn direction_energy_bounds_hold(e in space_and_set(), mask in any::<u64>(), m in 1usize..4) {
        let s = *e.space();
        prop_assume!(m < s.n());
        let theta: Vec<Subspace> = grassmannian(s, s.n() - m)
            .unwrap()
            .enumerate()
            .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
            .map(|(_, w)| w)
            .collect();
        let r = direction_energy_bounds(&e, &theta, m).unwrap();
        prop_assert!(r.ok, "{:?}", r);
    }

    #[test]
    fn censuses_never_exceed_bounds(e in space_and_set(), m in 1usize..4, big_n in 0u64..20, num in 1u64..10) {
        let s = *e.space();
        prop_assume!(m < s.n());
        let dirs = Directions::of_codim(s, m).unwrap();
        let small = exceptional_census_small(&e, &dirs, big_n).unwrap();
        prop_assert!(!small.is_violation(), "{:?}", small);
        let large = exceptional_census_large(&e, &dirs, Fraction::new(num, 10).unwrap()).unwrap();
        prop_assert!(!large.is_violation(), "{:?}", large);
    }

    #[test]
    fn energy_monotone_under_family_growth(e in space_and_set(), cut in 0usize..200) {
        let s = *e.space();
        let all = PlaneFamily::all(s, 1).unwrap();
        let k = cut.min(all.len());
        let part = PlaneFamily::new(s, 1, all.planes()[..k].to_vec()).unwrap();
        prop_assert!(energy(&e, &part).unwrap() <= energy(&e, &all).unwrap());
    }
}

#[test]
fn containment_counts_exhaustive() {
    for (p, n) in [(2u64, 2usize), (2, 3), (3, 2), (3, 3)] {
        let s = AmbientSpace::new(p, n).unwrap();
        for m in 0..=n {
            for xi in s.points().filter(|x| !x.is_zero()) {
                let (containing, perp) = count_subspaces_exhaustive(&s, &xi, m).unwrap();
                assert_eq!(BigUint::from(containing), count_subspaces_containing(&s, &xi, m).unwrap());
                assert_eq!(BigUint::from(perp), count_subspaces_with_perp_containing(&s, &xi, m).unwrap());
            }
        }
    }
}
