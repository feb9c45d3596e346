use driven_impurity::diagnostics::{pt_classify, DEFAULT_PT_TOL};
use driven_impurity::floquet_analytics::quasienergy_gap;
use driven_impurity::gaussian::{evolve, floquet_propagator, initial_state};
use driven_impurity::manybody_ed::average_energy_spectrum_mb;
use driven_impurity::{ChainParams, DriveSpec};

fn trace_and_idempotency(drive: DriveSpec, n_sub: usize) {
    let params = ChainParams::free(50).unwrap();
    let prop = floquet_propagator(&params, &drive, n_sub).unwrap();
    let mut state = initial_state(&params).unwrap();
    for _ in 0..1000 {
        state = evolve(&state, &prop, false).unwrap();
    }
    let c = state.correlation();
    let trace: f64 = (0..c.nrows()).map(|i| c[(i, i)].re).sum();
    assert!((trace - 50.0).abs() < 1e-9, "trace {trace}");
    let c2 = &c * &c;
    let mut worst = 0.0f64;
    for j in 0..c.ncols() {
        for i in 0..c.nrows() {
            worst = worst.max((c2[(i, j)] - c[(i, j)]).norm());
        }
    }
    assert!(worst < 1e-8, "idempotency defect {worst:e}");
}

#[test]
fn thousand_two_step_cycles_conserve_the_state() {
    trace_and_idempotency(DriveSpec::two_step(2.5, 0.5).unwrap(), 1);
    trace_and_idempotency(DriveSpec::two_step(4.2, 0.5).unwrap(), 1);
}

#[test]
fn thousand_harmonic_cycles_conserve_the_state() {
    trace_and_idempotency(DriveSpec::harmonic(3.3).unwrap(), 64);
}

#[test]
fn gap_decreases_towards_the_transition() {
    let params = ChainParams::free(200).unwrap();
    let periods: Vec<f64> = (0..=13).map(|k| 0.2 + k as f64 * 0.2).chain([3.0, 3.1, 3.14, 3.3]).collect();
    let gaps: Vec<f64> = periods.iter().map(|&t| quasienergy_gap(&params, t).unwrap()).collect();
    let below_pi: Vec<f64> = gaps[..periods.len() - 1].to_vec();
    assert!(below_pi.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    // crosses 1e-2 inside [3.0, 3.3]
    let first = periods.iter().zip(&gaps).find(|(_, g)| **g < 1e-2).map(|(t, _)| *t).unwrap();
    assert!((3.0..=3.3).contains(&first), "{first}");
}

#[test]
fn many_body_tables_are_deterministic() {
    let params = ChainParams::new(5, 0.1).unwrap();
    let drive = DriveSpec::two_step(2.2, 0.5).unwrap();
    let a = average_energy_spectrum_mb(&params, &drive, 5).unwrap();
    let b = average_energy_spectrum_mb(&params, &drive, 5).unwrap();
    assert_eq!(a.records(), b.records());
    assert_eq!(a.len(), 252);
    assert!((a.total_weight() - 1.0).abs() < 1e-8);
}

#[test]
fn pt_score_is_continuous_away_from_the_boundary() {
    let params = ChainParams::free(50).unwrap();
    let mut prev: Option<f64> = None;
    for k in 0..=20 {
        let t = 1.0 + 0.02 * k as f64;
        let p = pt_classify(&params, &DriveSpec::non_hermitian(t, 1.5).unwrap(), DEFAULT_PT_TOL).unwrap();
        if let Some(q) = prev {
            assert!((p.score - q).abs() < 1e-8, "T={t}");
        }
        prev = Some(p.score);
    }
}
