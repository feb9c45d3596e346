//! Quantitative self-checks shared by the command-line verifier and the
//! acceptance tests. Each returns the measured quantity; thresholds are left
//! to the caller.

use crate::diagnostics::linear_fit;
use crate::error::Result;
use crate::floquet_analytics::{characteristic_roots, default_grid_size, floquet_hamiltonian_exact, sw_effective_hamiltonian};
use crate::gaussian::harmonic_propagator;
use crate::linalg::{hermitian_eigenvalues, max_abs_diff};
use crate::model::ChainParams;

/// `max |U(n_sub) - exp(-i h_F T)|` for the harmonic drive.
pub fn propagator_deviation(params: &ChainParams, period: f64, n_sub: usize) -> Result<f64> {
    let exact = floquet_hamiltonian_exact(params, period)?.one_period_propagator()?;
    let numeric = harmonic_propagator(params, period, n_sub)?;
    Ok(max_abs_diff(numeric.matrix(), exact.as_ref()))
}

/// Deviations at `n_sub, 2 n_sub, ...` (`levels` values) and the ratios of
/// consecutive ones; second-order convergence gives ratios near 4.
pub fn propagator_convergence(params: &ChainParams, period: f64, n_sub: usize, levels: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let exact = floquet_hamiltonian_exact(params, period)?.one_period_propagator()?;
    let mut errs = Vec::with_capacity(levels);
    for k in 0..levels {
        let numeric = harmonic_propagator(params, period, n_sub << k)?;
        errs.push(max_abs_diff(numeric.matrix(), exact.as_ref()));
    }
    let ratios = errs.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((errs, ratios))
}

/// Root count and `max |E_root - E_diag|` against the sorted spectrum of
/// the exact Floquet Hamiltonian.
pub fn root_agreement(params: &ChainParams, period: f64) -> Result<(usize, f64)> {
    let roots = characteristic_roots(params, period, default_grid_size(params))?;
    let exact = floquet_hamiltonian_exact(params, period)?.spectrum()?;
    let mut energies: Vec<f64> = roots.iter().map(|r| r.energy).collect();
    energies.sort_by(f64::total_cmp);
    let worst = energies.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((roots.len(), worst))
}

/// Log-log slope of the lower-band error of the effective Hamiltonian
/// against `T`; the error is `max_k |E_k(h_F) - E_k(H_eff)|` over the `L`
/// lowest levels.
pub fn sw_error_exponent(params: &ChainParams, periods: &[f64]) -> Result<f64> {
    let l = params.half_length();
    let mut xs = Vec::with_capacity(periods.len());
    let mut ys = Vec::with_capacity(periods.len());
    for &t in periods {
        let exact = floquet_hamiltonian_exact(params, t)?.spectrum()?;
        let eff = hermitian_eigenvalues(sw_effective_hamiltonian(params, t)?.as_ref())?;
        let err = exact[..l].iter().zip(&eff).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        xs.push(t.ln());
        ys.push(err.ln());
    }
    Ok(linear_fit(&xs, &ys).0)
}

/// The periods `0.05, 0.10, ..., 0.40`.
pub fn sw_periods() -> Vec<f64> {
    (1..=8).map(|k| 0.05 * k as f64).collect()
}
