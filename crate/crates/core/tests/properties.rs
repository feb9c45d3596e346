use driven_impurity::diagnostics::{classify_heating, revival_minima, EETimeSeries, PhaseLabel};
use driven_impurity::floquet_analytics::{fold_quasienergy, mirror};
use driven_impurity::gaussian::{
    entanglement_entropy, evolve, floquet_propagator, initial_state, two_step_propagator,
};
use driven_impurity::linalg::{commutator, hermiticity_defect, unitarity_defect};
use driven_impurity::manybody_ed::{binomial, lowest_k_free_spectrum, SectorBasis};
use driven_impurity::model::{chain_halves, single_particle_hamiltonian};
use driven_impurity::{ChainParams, DriveSpec};
use faer::c64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn hamiltonian_is_exactly_hermitian(l in 2usize..40, lambda in -1.0f64..=1.0) {
        let h = single_particle_hamiltonian(&ChainParams::free(l).unwrap(), lambda);
        prop_assert_eq!(hermiticity_defect(h.as_ref()), 0.0);
    }

    #[test]
    fn mirror_is_an_involution_commuting_with_the_halves(l in 2usize..30) {
        let s = mirror(l).unwrap();
        let sq = &s * &s;
        for i in 0..2 * l {
            for j in 0..2 * l {
                let want = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
                prop_assert_eq!(sq[(i, j)], want);
            }
        }
        let halves = chain_halves(&ChainParams::free(l).unwrap());
        let c = commutator(s.as_ref(), halves.as_ref());
        prop_assert!(c.col_iter().all(|col| col.iter().all(|z| *z == c64::new(0.0, 0.0))));
    }

    #[test]
    fn two_step_propagator_is_unitary(l in 2usize..20, t in 0.05f64..6.0, lambda in -1.0f64..=1.0) {
        let params = ChainParams::free(l).unwrap();
        let u = two_step_propagator(&params, &DriveSpec::two_step(t, lambda).unwrap()).unwrap();
        prop_assert!(u.is_unitary());
        prop_assert!(unitarity_defect(u.matrix()) < 1e-11);
    }

    #[test]
    fn pure_state_entropy_is_symmetric(l in 2usize..16, t in 0.3f64..5.0, cycles in 0usize..6, cut in 1usize..16) {
        let params = ChainParams::free(l).unwrap();
        let prop = two_step_propagator(&params, &DriveSpec::two_step(t, 0.5).unwrap()).unwrap();
        let mut state = initial_state(&params).unwrap();
        for _ in 0..cycles {
            state = evolve(&state, &prop, false).unwrap();
        }
        let n = 2 * l;
        let cut = 1 + cut % (n - 1);
        let a = entanglement_entropy(&state, 1, cut).unwrap();
        let b = entanglement_entropy(&state, cut + 1, n).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn non_unitary_evolution_stays_orthonormal(l in 2usize..12, t in 0.5f64..5.0, lambda in 1.05f64..2.5, steps in 1usize..8) {
        let params = ChainParams::free(l).unwrap();
        let prop = floquet_propagator(&params, &DriveSpec::non_hermitian(t, lambda).unwrap(), 1).unwrap();
        let mut state = initial_state(&params).unwrap();
        for _ in 0..steps {
            state = evolve(&state, &prop, true).unwrap();
            prop_assert!(state.orthonormality_defect() < 1e-10);
        }
    }

    #[test]
    fn heating_label_ignores_constant_offsets(
        values in proptest::collection::vec(0.0f64..3.0, 61..120),
        c in 0.0f64..10.0,
    ) {
        let s = EETimeSeries::new(values, 1.0).unwrap();
        let a = classify_heating(&s, (5, 60), 0.02).unwrap();
        let b = classify_heating(&s.shifted(c), (5, 60), 0.02).unwrap();
        prop_assert_eq!(a.label, b.label);
        prop_assert!((a.score - b.score).abs() < 1e-9);
    }

    #[test]
    fn constant_series_never_heats(v in 0.0f64..5.0, len in 10usize..100) {
        let s = EETimeSeries::new(vec![v; len], 2.0).unwrap();
        let p = classify_heating(&s, (1, len - 1), 0.0).unwrap();
        prop_assert_eq!(p.label, PhaseLabel::NonHeating);
    }

    #[test]
    fn revival_minima_ignore_offsets(values in proptest::collection::vec(0.0f64..3.0, 10..80), c in 0.0f64..5.0) {
        let s = EETimeSeries::new(values, 1.0).unwrap();
        prop_assert_eq!(revival_minima(&s, 0.2), revival_minima(&s.shifted(c), 0.2));
    }

    #[test]
    fn sector_index_round_trip(sites in 1usize..17, pick in 0usize..17) {
        let n = pick % (sites + 1);
        let b = SectorBasis::new(sites, n).unwrap();
        prop_assert_eq!(b.len() as u128, binomial(sites, n));
        for (i, &s) in b.states().iter().enumerate() {
            prop_assert_eq!(s.count_ones() as usize, n);
            prop_assert_eq!(b.index_of(s), Some(i));
        }
        prop_assert!(b.states().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lowest_k_matches_enumeration(theta in proptest::collection::vec(-2.0f64..2.0, 1..11), pick in 0usize..11, kfrac in 0.0f64..=1.0) {
        let n = pick % (theta.len() + 1);
        let b = SectorBasis::new(theta.len(), n).unwrap();
        let mut sorted = theta.clone();
        sorted.sort_by(f64::total_cmp);
        let mut all: Vec<f64> = b
            .states()
            .iter()
            .map(|&m| (0..sorted.len()).filter(|i| m >> i & 1 == 1).map(|i| sorted[i]).sum())
            .collect();
        all.sort_by(f64::total_cmp);
        let k = 1 + ((all.len() - 1) as f64 * kfrac) as usize;
        let got = lowest_k_free_spectrum(&theta, n, k).unwrap();
        prop_assert_eq!(got.len(), k);
        prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
        for (a, b) in got.iter().zip(&all) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn folding_lands_in_the_zone(e in -100.0f64..100.0, t in 0.05f64..10.0) {
        let f = fold_quasienergy(e, t);
        let w = 2.0 * PI / t;
        prop_assert!(f > -0.5 * w - 1e-12 && f <= 0.5 * w + 1e-12);
        let k = ((e - f) / w).round();
        prop_assert!((e - f - k * w).abs() < 1e-9 * (1.0 + e.abs()));
    }
}
