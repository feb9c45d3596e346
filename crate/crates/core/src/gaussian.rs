//! Slater-determinant states, their evolution under quadratic propagators,
//! and entanglement entropies from restricted correlation matrices.
//!
//! Entropies are in nats. Intervals and cuts are 1-based and inclusive,
//! `[a, b]` with `1 <= a <= b <= 2L`.

use faer::c64;
use faer::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    exp_minus_i, exp_minus_i_real, hermitian_eigen, hermitian_eigenvalues, hermiticity_defect, is_real, unitarity_defect,
    CMat,
};
use crate::model::{hamiltonian_at, single_particle_hamiltonian, ChainParams, DriveFamily, DriveSpec};

/// Filled orbitals as the columns of a `2L x N` matrix.
#[derive(Debug, Clone)]
pub struct GaussianState {
    orbitals: CMat,
}

const ORTHONORMAL_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-12;
const FERMI_GAP_TOL: f64 = 1e-12;
const NU_EPS: f64 = 1e-14;

impl GaussianState {
    pub fn from_orbitals(orbitals: CMat) -> Result<Self> {
        if orbitals.ncols() > orbitals.nrows() {
            return Err(invalid("more orbitals than sites"));
        }
        let defect = unitarity_defect(orbitals.as_ref());
        if defect > ORTHONORMAL_TOL {
            return Err(invalid(format!("orbitals are not orthonormal (defect {defect:e})")));
        }
        Ok(GaussianState { orbitals })
    }

    /// State with no particles.
    pub fn empty(sites: usize) -> Self {
        GaussianState {
            orbitals: CMat::zeros(sites, 0),
        }
    }

    pub fn orbitals(&self) -> MatRef<'_, c64> {
        self.orbitals.as_ref()
    }

    pub fn filling(&self) -> usize {
        self.orbitals.ncols()
    }

    pub fn sites(&self) -> usize {
        self.orbitals.nrows()
    }

    /// `C = Phi Phi^dag` with `C_ij = <c_i^dag c_j>` up to complex conjugation.
    pub fn correlation(&self) -> CMat {
        &self.orbitals * self.orbitals.adjoint()
    }

    /// `max |Phi^dag Phi - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        unitarity_defect(self.orbitals.as_ref())
    }
}

/// Applies the largest-modulus-component-real-positive rule to a column.
fn fix_phase(col: &mut [c64]) {
    let mut best = 0usize;
    let mut mag = -1.0;
    for (i, z) in col.iter().enumerate() {
        let m = z.norm();
        if m > mag * (1.0 + 1e-12) {
            mag = m;
            best = i;
        }
    }
    if mag > 0.0 {
        let phase = col[best].conj() / mag;
        for z in col.iter_mut() {
            *z *= phase;
        }
    }
}

/// Lowest-`n` eigenvectors of the Hermitian `h`, ascending in energy.
pub fn ground_state(h: MatRef<'_, c64>, n: usize) -> Result<GaussianState> {
    let sites = h.nrows();
    if n > sites {
        return Err(invalid(format!("filling {n} exceeds {sites} sites")));
    }
    if hermiticity_defect(h) > 1e-12 {
        return Err(invalid("ground state requires a Hermitian Hamiltonian"));
    }
    if n == 0 {
        return Ok(GaussianState::empty(sites));
    }
    let evd = hermitian_eigen(h)?;
    if n < sites {
        let gap = evd.values[n] - evd.values[n - 1];
        if gap <= FERMI_GAP_TOL {
            return Err(Error::DegenerateFermiLevel { filling: n, gap });
        }
    }
    let mut orbitals = CMat::zeros(sites, n);
    for k in 0..n {
        let mut col = evd.vectors.column(k);
        fix_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            orbitals[(i, k)] = z;
        }
    }
    Ok(GaussianState { orbitals })
}

/// Half-filled ground state of the uniform chain.
pub fn initial_state(params: &ChainParams) -> Result<GaussianState> {
    let h = single_particle_hamiltonian(params, 1.0);
    ground_state(h.as_ref(), params.half_length())
}

/// Single-particle evolution operator.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: CMat,
    unitary: bool,
}

impl Propagator {
    /// Wraps `matrix`; with `unitary` set, unitarity is checked to 1e-10.
    pub fn new(matrix: CMat, unitary: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(invalid("propagator must be square"));
        }
        if unitary {
            let defect = unitarity_defect(matrix.as_ref());
            if defect > ORTHONORMAL_TOL {
                return Err(Error::NonNormalUnitary(defect));
            }
        }
        Ok(Propagator { matrix, unitary })
    }

    pub fn identity(sites: usize) -> Self {
        Propagator {
            matrix: CMat::identity(sites, sites),
            unitary: true,
        }
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `later * self`: first `self`, then `later`.
    pub fn then(&self, later: &Propagator) -> Propagator {
        Propagator {
            matrix: &later.matrix * &self.matrix,
            unitary: self.unitary && later.unitary,
        }
    }
}

/// `exp(-i h(lambda) T/2) exp(-i h(1) T/2)`; the uniform half acts first.
/// A nonzero gauge offset rotates the period origin.
pub fn two_step_propagator(params: &ChainParams, drive: &DriveSpec) -> Result<Propagator> {
    if !drive.is_two_step() {
        return Err(invalid("two-step propagator needs a two-step drive"));
    }
    segment_propagator(params, drive, 0.0, drive.period(), 1)
}

/// Ordered product of `n_sub` midpoint exponentials over one period of the
/// harmonic drive.
pub fn harmonic_propagator(params: &ChainParams, period: f64, n_sub: usize) -> Result<Propagator> {
    let drive = DriveSpec::harmonic(period)?;
    if n_sub == 0 {
        return Err(invalid("n_sub must be >= 1"));
    }
    midpoint_product(params, &drive, 0.0, period, n_sub)
}

/// One-period propagator for any drive family. `n_sub` is only used by the
/// harmonic drive.
pub fn floquet_propagator(params: &ChainParams, drive: &DriveSpec, n_sub: usize) -> Result<Propagator> {
    segment_propagator(params, drive, 0.0, drive.period(), n_sub)
}

/// Evolution from `t_start` to `t_end`. Two-step drives are integrated
/// exactly piece by piece; the harmonic drive uses midpoint steps of length
/// `T / n_sub` (the last one shortened to fit).
pub fn segment_propagator(
    params: &ChainParams,
    drive: &DriveSpec,
    t_start: f64,
    t_end: f64,
    n_sub: usize,
) -> Result<Propagator> {
    if t_start < 0.0 || t_start.is_nan() {
        return Err(Error::NegativeTime(t_start));
    }
    if !(t_end >= t_start) {
        return Err(invalid("segment end precedes its start"));
    }
    let n = params.sites();
    match drive.family() {
        DriveFamily::Harmonic => {
            if n_sub == 0 {
                return Err(invalid("n_sub must be >= 1"));
            }
            let len = t_end - t_start;
            if len == 0.0 {
                return Ok(Propagator::identity(n));
            }
            let steps = ((len / drive.period()) * n_sub as f64 - 1e-9).ceil().max(1.0) as usize;
            midpoint_product(params, drive, t_start, t_end, steps)
        }
        DriveFamily::TwoStep | DriveFamily::NonHermitianTwoStep => {
            let half = 0.5 * drive.period();
            let t0 = drive.gauge_offset();
            let mut acc = Propagator::identity(n);
            let mut t = t_start;
            while t < t_end {
                // next switching time of the shifted waveform
                let k = ((t + t0) / half).floor();
                let mut next = (k + 1.0) * half - t0;
                if next <= t {
                    next += half;
                }
                let stop = next.min(t_end);
                let lambda = drive.two_step_lambda_at(0.5 * (t + stop));
                let h = single_particle_hamiltonian(params, lambda);
                let step = exp_minus_i(h.as_ref(), stop - t)?;
                let unitary = lambda.abs() <= 1.0;
                acc = acc.then(&Propagator { matrix: step, unitary });
                t = stop;
            }
            Ok(acc)
        }
    }
}

fn midpoint_product(params: &ChainParams, drive: &DriveSpec, t_start: f64, t_end: f64, steps: usize) -> Result<Propagator> {
    let dt = (t_end - t_start) / steps as f64;
    let mut acc: Option<CMat> = None;
    for k in 0..steps {
        let t_mid = t_start + (k as f64 + 0.5) * dt;
        let h = hamiltonian_at(params, drive, t_mid)?;
        let step = if is_real(h.as_ref()) {
            let hr = Mat::<f64>::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)].re);
            exp_minus_i_real(hr.as_ref(), dt)
        } else {
            hermitian_eigen(h.as_ref())?.propagator(dt)
        };
        acc = Some(match acc {
            None => step,
            Some(u) => &step * &u,
        });
    }
    let matrix = match acc {
        Some(u) if steps > 1 => crate::linalg::polish_unitary(u.as_ref()),
        Some(u) => u,
        None => CMat::identity(params.sites(), params.sites()),
    };
    Ok(Propagator { matrix, unitary: true })
}

/// `Phi -> U Phi`, re-orthonormalized when `renormalize` is set. Non-unitary
/// propagators require renormalization.
pub fn evolve(state: &GaussianState, prop: &Propagator, renormalize: bool) -> Result<GaussianState> {
    if prop.dim() != state.sites() {
        return Err(invalid(format!(
            "propagator dimension {} does not match {} sites",
            prop.dim(),
            state.sites()
        )));
    }
    if !prop.is_unitary() && !renormalize {
        return Err(invalid("non-unitary evolution must renormalize"));
    }
    let moved = prop.matrix() * state.orbitals();
    let orbitals = if renormalize {
        crate::linalg::orthonormalize(moved.as_ref(), RANK_TOL)?
    } else {
        moved
    };
    Ok(GaussianState { orbitals })
}

/// Binary entropy of the occupation spectrum, with clipping.
pub fn entropy_from_occupations(nus: &[f64]) -> f64 {
    nus.iter()
        .map(|&nu| {
            let nu = nu.clamp(NU_EPS, 1.0 - NU_EPS);
            -(nu * nu.ln() + (1.0 - nu) * (1.0 - nu).ln())
        })
        .sum()
}

/// Occupation spectrum of the sites `rows` (0-based, as a range). The
/// smallest of the three equivalent Gram forms is diagonalized: `C_A`, the
/// orbital overlap `Phi_A^dag Phi_A`, or the complement's overlap.
fn occupations(state: &GaussianState, rows: std::ops::Range<usize>) -> Result<Vec<f64>> {
    let phi = state.orbitals();
    let n = state.filling();
    let len = rows.len();
    let comp = state.sites() - len;
    if n == 0 || len == 0 {
        return Ok(Vec::new());
    }
    let block = phi.subrows(rows.start, len);
    let smallest = len.min(n).min(comp);
    let gram = if smallest == len {
        block * block.adjoint()
    } else if smallest == n {
        block.adjoint() * block
    } else {
        // the complement's occupations are 1 - nu, with equal entropy
        let outside: Vec<usize> = (0..rows.start).chain(rows.end..state.sites()).collect();
        let b = CMat::from_fn(comp, n, |r, k| phi[(outside[r], k)]);
        &b * b.adjoint()
    };
    let gram = CMat::from_fn(gram.nrows(), gram.ncols(), |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)].conj()));
    hermitian_eigenvalues(gram.as_ref())
}

/// Entanglement entropy of the sites `a..=b` (1-based).
pub fn entanglement_entropy(state: &GaussianState, a: usize, b: usize) -> Result<f64> {
    if !(1 <= a && a <= b && b <= state.sites()) {
        return Err(invalid(format!("interval [{a}, {b}] outside 1..={}", state.sites())));
    }
    let nus = occupations(state, a - 1..b)?;
    Ok(entropy_from_occupations(&nus))
}

/// Entropies of the left blocks `[1, l]`, `l = 1..2L-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementProfile {
    entropies: Vec<f64>,
}

impl EntanglementProfile {
    /// Entropy at cut `l` (1-based).
    pub fn at(&self, cut: usize) -> f64 {
        self.entropies[cut - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.entropies
    }

    pub fn cuts(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entropies.iter().enumerate().map(|(i, &s)| (i + 1, s))
    }

    /// Cut with the largest entropy (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.entropies.iter().enumerate() {
            if s > self.entropies[best] {
                best = i;
            }
        }
        best + 1
    }
}

pub fn entanglement_profile(state: &GaussianState) -> Result<EntanglementProfile> {
    let entropies = (1..state.sites())
        .map(|l| entanglement_entropy(state, 1, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntanglementProfile { entropies })
}

/// Entropy of the left half `[1, L]`.
pub fn half_chain_entropy(state: &GaussianState) -> Result<f64> {
    entanglement_entropy(state, 1, state.sites() / 2)
}

/// Leading-order bound on `|U - 1|` for a short period: `T (|h_0| + |h_1|)/2`
/// in the max-row-sum norm.
pub fn short_period_bound(params: &ChainParams, drive: &DriveSpec) -> f64 {
    let norm = |lambda: f64| {
        let h = single_particle_hamiltonian(params, lambda);
        (0..h.nrows())
            .map(|i| (0..h.ncols()).map(|j| h[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    0.5 * drive.period() * (norm(1.0) + norm(drive.lambda()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::linalg::{eigenvalues, max_abs_diff};
    use crate::model::uniform_chain;

    fn p(l: usize) -> ChainParams {
        ChainParams::free(l).unwrap()
    }

    #[test]
    fn four_site_correlations() {
        let params = p(2);
        let gs = initial_state(&params).unwrap();
        let c = gs.correlation();
        // analytic open-chain modes sqrt(2/5) sin(k j pi/5), k = 1, 2
        let mode = |k: f64, j: f64| (0.4f64).sqrt() * (k * j * PI / 5.0).sin();
        for i in 1..=4 {
            for j in 1..=4 {
                let want = mode(1.0, i as f64) * mode(1.0, j as f64) + mode(2.0, i as f64) * mode(2.0, j as f64);
                assert!((c[(i - 1, j - 1)].re - want).abs() < 1e-14);
                assert!(c[(i - 1, j - 1)].im.abs() < 1e-14);
            }
        }
        assert!((c[(0, 0)].re - 0.5).abs() < 1e-14);
        // the two-site block has occupations 1/2 +- 1/sqrt 5
        let block = CMat::from_fn(2, 2, |i, j| c[(i, j)]);
        let nu = hermitian_eigenvalues(block.as_ref()).unwrap();
        assert!((nu[1] - 0.5 - 0.2f64.sqrt()).abs() < 1e-14);
        assert!((nu[0] - 0.5 + 0.2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn empty_and_full() {
        let h = uniform_chain(&p(3));
        let empty = ground_state(h.as_ref(), 0).unwrap();
        assert_eq!(empty.filling(), 0);
        assert_eq!(max_abs_diff(empty.correlation().as_ref(), CMat::zeros(6, 6).as_ref()), 0.0);
        let full = ground_state(h.as_ref(), 6).unwrap();
        let prof = entanglement_profile(&full).unwrap();
        assert!(prof.values().iter().all(|&s| s < 1e-10));
    }

    #[test]
    fn degenerate_fermi_level() {
        let mut h = CMat::zeros(4, 4);
        h[(0, 0)] = c64::new(-1.0, 0.0);
        let err = ground_state(h.as_ref(), 2).unwrap_err();
        assert!(matches!(err, Error::DegenerateFermiLevel { filling: 2, .. }));
    }

    #[test]
    fn phase_rule_is_applied() {
        let gs = initial_state(&p(5)).unwrap();
        for k in 0..gs.filling() {
            let col: Vec<c64> = (0..gs.sites()).map(|i| gs.orbitals()[(i, k)]).collect();
            let (idx, _) = col
                .iter()
                .enumerate()
                .fold((0, -1.0), |(bi, bm), (i, z)| if z.norm() > bm * (1.0 + 1e-12) { (i, z.norm()) } else { (bi, bm) });
            assert!(col[idx].im == 0.0 && col[idx].re > 0.0);
        }
    }

    #[test]
    fn half_chain_log_scaling() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for l in [32, 64, 128, 200] {
            let gs = initial_state(&p(l)).unwrap();
            xs.push(((2 * l) as f64).ln());
            ys.push(half_chain_entropy(&gs).unwrap());
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((slope - 1.0 / 6.0).abs() < 0.01, "slope {slope}");
    }

    #[test]
    fn single_mode_half_filled_gives_ln2() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = CMat::from_fn(2, 1, |_, _| c64::new(s, 0.0));
        let st = GaussianState::from_orbitals(phi).unwrap();
        assert!((entanglement_entropy(&st, 1, 1).unwrap() - 2f64.ln()).abs() < 1e-14);
        let product = GaussianState::from_orbitals(CMat::identity(4, 2)).unwrap();
        assert!(entanglement_profile(&product).unwrap().values().iter().all(|&s| s.abs() < 1e-11));
    }

    #[test]
    fn gram_forms_agree() {
        // compare against the direct restricted-correlation definition
        let params = p(6);
        let st = ground_state(single_particle_hamiltonian(&params, 0.3).as_ref(), 4).unwrap();
        let c = st.correlation();
        for a in 1..=12 {
            for b in a..=12 {
                let block = CMat::from_fn(b - a + 1, b - a + 1, |i, j| c[(a - 1 + i, a - 1 + j)]);
                let nus = hermitian_eigenvalues(block.as_ref()).unwrap();
                let want = entropy_from_occupations(&nus);
                let got = entanglement_entropy(&st, a, b).unwrap();
                assert!((got - want).abs() < 1e-10, "[{a},{b}] {got} vs {want}");
            }
        }
    }

    #[test]
    fn profile_peaks_at_center() {
        let gs = initial_state(&p(200)).unwrap();
        let prof = entanglement_profile(&gs).unwrap();
        // open-chain parity oscillation: odd cuts sit slightly higher
        assert!(prof.argmax().abs_diff(200) == 1);
        let even_max = (1..200).map(|k| 2 * k).max_by(|&a, &b| prof.at(a).total_cmp(&prof.at(b))).unwrap();
        assert_eq!(even_max, 200);
        assert!((prof.at(200) - 1.2848050007295269).abs() < 1e-9);
        assert!((prof.at(199) - 1.2887170836790265).abs() < 1e-9);
        for l in 1..400 {
            assert!((prof.at(l) - prof.at(400 - l)).abs() < 1e-9);
        }
    }

    #[test]
    fn two_step_limits() {
        let params = p(4);
        let uniform = two_step_propagator(&params, &DriveSpec::two_step(0.8, 1.0).unwrap()).unwrap();
        let direct = exp_minus_i(uniform_chain(&params).as_ref(), 0.8).unwrap();
        assert!(max_abs_diff(uniform.matrix(), direct.as_ref()) < 1e-13);

        let drive = DriveSpec::two_step(1e-3, 0.5).unwrap();
        let u = two_step_propagator(&params, &drive).unwrap();
        let dev = (0..8)
            .map(|i| (0..8).map(|j| (u.matrix()[(i, j)] - if i == j { 1.0 } else { 0.0 }).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        assert!(dev <= short_period_bound(&params, &drive) * (1.0 + 1e-3));
    }

    #[test]
    fn two_step_order_and_gauge() {
        let params = p(3);
        let drive = DriveSpec::two_step(2.0, 0.4).unwrap();
        let h0 = uniform_chain(&params);
        let h1 = single_particle_hamiltonian(&params, 0.4);
        let want = exp_minus_i(h1.as_ref(), 1.0).unwrap() * exp_minus_i(h0.as_ref(), 1.0).unwrap();
        let got = two_step_propagator(&params, &drive).unwrap();
        assert!(max_abs_diff(got.matrix(), want.as_ref()) < 1e-13);

        let shifted = two_step_propagator(&params, &drive.with_gauge_offset(1.0).unwrap()).unwrap();
        let swapped = exp_minus_i(h0.as_ref(), 1.0).unwrap() * exp_minus_i(h1.as_ref(), 1.0).unwrap();
        assert!(max_abs_diff(shifted.matrix(), swapped.as_ref()) < 1e-13);
    }

    #[test]
    fn unitary_two_step_at_fig2_point() {
        let params = p(200);
        let u = two_step_propagator(&params, &DriveSpec::two_step(2.5, 0.5).unwrap()).unwrap();
        assert!(u.is_unitary());
        assert!(unitarity_defect(u.matrix()) < 1e-10);
    }

    #[test]
    fn pt_symmetric_point_stays_on_circle() {
        let params = p(20);
        let u = two_step_propagator(&params, &DriveSpec::non_hermitian(2.0, 1.2).unwrap()).unwrap();
        assert!(!u.is_unitary());
        let ev = eigenvalues(u.matrix()).unwrap();
        assert!(ev.iter().all(|z| (z.norm() - 1.0).abs() < 1e-8));
    }

    #[test]
    fn harmonic_single_step_is_midpoint() {
        let params = p(3);
        let t = 1.7;
        let u = harmonic_propagator(&params, t, 1).unwrap();
        let h = hamiltonian_at(&params, &DriveSpec::harmonic(t).unwrap(), t / 2.0).unwrap();
        let want = exp_minus_i(h.as_ref(), t).unwrap();
        assert!(max_abs_diff(u.matrix(), want.as_ref()) < 1e-13);
    }

    #[test]
    fn segments_compose_to_period() {
        let params = p(3);
        for drive in [DriveSpec::two_step(2.2, 0.3).unwrap(), DriveSpec::harmonic(2.2).unwrap()] {
            let whole = segment_propagator(&params, &drive, 0.0, 2.2, 64).unwrap();
            let a = segment_propagator(&params, &drive, 0.0, 0.55, 64).unwrap();
            let b = segment_propagator(&params, &drive, 0.55, 2.2, 64).unwrap();
            assert!(max_abs_diff(whole.matrix(), a.then(&b).matrix()) < 1e-12, "{:?}", drive.family());
        }
    }

    #[test]
    fn evolve_contracts() {
        let params = p(4);
        let gs = initial_state(&params).unwrap();
        let same = evolve(&gs, &Propagator::identity(8), false).unwrap();
        assert_eq!(max_abs_diff(same.orbitals(), gs.orbitals()), 0.0);

        let u = two_step_propagator(&params, &DriveSpec::two_step(2.5, 0.5).unwrap()).unwrap();
        let next = evolve(&gs, &u, false).unwrap();
        assert!(next.orthonormality_defect() < 1e-10);
        let renorm = evolve(&gs, &u, true).unwrap();
        let c1 = next.correlation();
        let c2 = renorm.correlation();
        assert!(max_abs_diff(c1.as_ref(), c2.as_ref()) < 1e-10);

        let nh = two_step_propagator(&params, &DriveSpec::non_hermitian(2.5, 1.2).unwrap()).unwrap();
        assert!(matches!(evolve(&gs, &nh, false), Err(Error::InvalidParameter(_))));
        assert!(evolve(&gs, &nh, true).unwrap().orthonormality_defect() < 1e-12);
        assert!(evolve(&gs, &Propagator::identity(6), false).is_err());
    }

    #[test]
    fn rank_loss_is_reported() {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = c64::new(1.0, 0.0);
        m[(0, 1)] = c64::new(1.0, 0.0);
        let prop = Propagator::new(m, false).unwrap();
        let st = GaussianState::from_orbitals(CMat::identity(4, 2)).unwrap();
        assert!(matches!(evolve(&st, &prop, true), Err(Error::RankDeficient(_))));
    }
}
