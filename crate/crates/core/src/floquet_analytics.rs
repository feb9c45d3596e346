//! Exact single-particle Floquet analytics of the harmonic drive.
//!
//! The harmonic drive is a rotation of the uniform chain by the mirror
//! operator `sigma`, so the Floquet Hamiltonian is known in closed form,
//! `h_F = h(0) + (pi/T)(sigma - 1)`. Its spectrum solves a polynomial
//! equation in Chebyshev form, which is used here as an independent route to
//! eigenvalues, eigenvectors and average energies.
//!
//! Chebyshev convention: `s_n(x) = sinh(n kappa)/sinh(kappa)` with
//! `x = cosh(kappa)`, i.e. `s_n = U_{n-1}(x)`, a real polynomial for real `x`.

use std::f64::consts::PI;

use faer::c64;
use faer::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::gaussian::two_step_propagator;
use crate::linalg::{
    clusters, diagonal_expectations, hermitian_eigen, max_abs_diff, resolve_degeneracies, scale, unitary_eigen, CMat,
    I, ONE, ZERO,
};
use crate::model::{bond_matrix, chain_halves, imbalance_matrix, single_particle_hamiltonian, ChainParams, DriveSpec};

/// `sigma_{j, 2L+1-j} = i` for `j <= L` and `-i` otherwise (1-based).
pub fn mirror(half_length: usize) -> Result<CMat> {
    if half_length == 0 {
        return Err(invalid("mirror operator needs L >= 1"));
    }
    let n = 2 * half_length;
    let mut s = CMat::zeros(n, n);
    for j in 0..n {
        s[(j, n - 1 - j)] = if j < half_length { I } else { -I };
    }
    Ok(s)
}

/// `exp(i theta sigma) = cos(theta) + i sin(theta) sigma`, using `sigma^2 = 1`.
pub fn mirror_rotation(half_length: usize, theta: f64) -> Result<CMat> {
    let s = mirror(half_length)?;
    let n = s.nrows();
    let (sn, cs) = theta.sin_cos();
    Ok(CMat::from_fn(n, n, |i, j| {
        let d = if i == j { c64::new(cs, 0.0) } else { ZERO };
        d + I * sn * s[(i, j)]
    }))
}

/// Deviations of the mirror algebra at the single-particle level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Report {
    /// `max |[sigma, Omega] + 2i Gamma|`
    pub sigma_omega: f64,
    /// `max |[sigma, Gamma] - 2i Omega|`
    pub sigma_gamma: f64,
    /// `max |e^{i pi/4 sigma} Gamma e^{-i pi/4 sigma} + Omega|`
    pub quarter_rotation: f64,
    /// `max |[sigma, H_L + H_R]|`
    pub halves_commutator: f64,
}

impl Su2Report {
    pub fn max_deviation(&self) -> f64 {
        self.sigma_omega
            .max(self.sigma_gamma)
            .max(self.quarter_rotation)
            .max(self.halves_commutator)
    }
}

pub fn su2_check(half_length: usize) -> Result<Su2Report> {
    let params = ChainParams::free(half_length)?;
    let s = mirror(half_length)?;
    let g = bond_matrix(&params);
    let o = imbalance_matrix(&params);
    let halves = chain_halves(&params);
    let comm = |a: &CMat, b: &CMat| a * b - b * a;
    let two_i = c64::new(0.0, 2.0);
    let sigma_omega = max_abs_diff(comm(&s, &o).as_ref(), scale(g.as_ref(), -two_i).as_ref());
    let sigma_gamma = max_abs_diff(comm(&s, &g).as_ref(), scale(o.as_ref(), two_i).as_ref());
    let r = mirror_rotation(half_length, PI / 4.0)?;
    let rotated = &r * &g * r.adjoint();
    let quarter_rotation = max_abs_diff(rotated.as_ref(), scale(o.as_ref(), -ONE).as_ref());
    let c = comm(&s, &halves);
    let halves_commutator = max_abs_diff(c.as_ref(), CMat::zeros(c.nrows(), c.ncols()).as_ref());
    Ok(Su2Report {
        sigma_omega,
        sigma_gamma,
        quarter_rotation,
        halves_commutator,
    })
}

/// `h_F = h(0) + (pi/T)(sigma - 1)` for the harmonic drive.
#[derive(Debug, Clone)]
pub struct FloquetHamiltonianSP {
    matrix: CMat,
    period: f64,
}

impl FloquetHamiltonianSP {
    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Ascending eigenvalues.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        crate::linalg::hermitian_eigenvalues(self.matrix.as_ref())
    }

    /// `exp(-i h_F T)`.
    pub fn one_period_propagator(&self) -> Result<CMat> {
        Ok(hermitian_eigen(self.matrix.as_ref())?.propagator(self.period))
    }
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("period T must be > 0, got {period}")))
    }
}

pub fn floquet_hamiltonian_exact(params: &ChainParams, period: f64) -> Result<FloquetHamiltonianSP> {
    check_period(period)?;
    let mut h = single_particle_hamiltonian(params, 1.0);
    let s = mirror(params.half_length())?;
    let w = PI / period;
    let n = h.nrows();
    for j in 0..n {
        for i in 0..n {
            h[(i, j)] += s[(i, j)] * w;
        }
        h[(j, j)] -= c64::new(w, 0.0);
    }
    Ok(FloquetHamiltonianSP { matrix: h, period })
}

/// Band gap of `h_F`. States are assigned to the lower (upper) band by
/// ranking their mirror expectation `<sigma>`; the gap is the lowest upper-band
/// energy minus the highest lower-band energy. While the bands are separated
/// this equals `E_{L+1} - E_L`; overlapping bands give a negative value.
pub fn quasienergy_gap(params: &ChainParams, period: f64) -> Result<f64> {
    let hf = floquet_hamiltonian_exact(params, period)?;
    let evd = hermitian_eigen(hf.matrix())?;
    let s = mirror(params.half_length())?;
    let parity = diagonal_expectations(evd.vectors.to_complex().as_ref(), s.as_ref());
    let mut order: Vec<usize> = (0..parity.len()).collect();
    order.sort_by(|&a, &b| parity[a].total_cmp(&parity[b]).then(a.cmp(&b)));
    let l = params.half_length();
    let lower_top = order[..l].iter().map(|&k| evd.values[k]).fold(f64::NEG_INFINITY, f64::max);
    let upper_bottom = order[l..].iter().map(|&k| evd.values[k]).fold(f64::INFINITY, f64::min);
    Ok(upper_bottom - lower_top)
}

/// `s_n(x)` multiplied by `exp(-(L + 1/2) a)`, `a = acosh|x|`, outside
/// `[-1, 1]`; the factor depends only on `x` and `L`, so ratios and signs are
/// unaffected while overflow is avoided.
fn scaled_cheb(n: usize, x: f64, l: usize) -> f64 {
    if x.abs() <= 1.0 {
        let q = x.acos();
        let sq = q.sin();
        if sq < 1e-150 {
            let sign = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
            return sign * n as f64;
        }
        return (n as f64 * q).sin() / sq;
    }
    let a = x.abs().acosh();
    let nf = n as f64;
    let v = ((nf - l as f64 - 1.5) * a).exp() * (-2.0 * nf * a).exp_m1() / (-2.0 * a).exp_m1();
    if x < 0.0 && n % 2 == 0 {
        -v
    } else {
        v
    }
}

/// `sum_{j=1}^{L} s_j(x)^2`, with the same scaling as [`scaled_cheb`] squared.
fn scaled_square_sum(x: f64, l: usize) -> f64 {
    let d = x * x - 1.0;
    let m = (2 * l + 1) as f64;
    if d.abs() < 1e-3 {
        return (1..=l).map(|j| scaled_cheb(j, x, l).powi(2)).sum();
    }
    if x.abs() < 1.0 {
        let q = x.acos();
        return ((m * q).sin() / q.sin() - m) / (4.0 * d);
    }
    let a = x.abs().acosh();
    // e^{-(2L+1)a} s_{2L+1}(|x|) = (1 - e^{-2(2L+1)a}) / (2 sinh a)
    let head = -(-2.0 * m * a).exp_m1() / (2.0 * a.sinh());
    let tail = m * (-m * a).exp();
    (head - tail) / (4.0 * d)
}

fn chebyshev_args(energy: f64, period: f64) -> (f64, f64) {
    let w = PI / period;
    (-(energy + 2.0 * w), -energy)
}

/// Pole-free form `s_L(x+) s_L(x-) - s_{L+1}(x-) s_{L+1}(x+)`, a degree-2L
/// polynomial in `E` whose zeros are the spectrum of `h_F`.
fn bracketing_function(energy: f64, period: f64, l: usize) -> f64 {
    let (xp, xm) = chebyshev_args(energy, period);
    scaled_cheb(l, xp, l) * scaled_cheb(l, xm, l) - scaled_cheb(l + 1, xm, l) * scaled_cheb(l + 1, xp, l)
}

/// `f(E) = sinh(k+ L)/sinh(k+ (L+1)) - sinh(k- (L+1))/sinh(k- L)` with
/// `cosh k+- = -(E + pi/T +- pi/T)`; real for real `E`.
pub fn characteristic_function(params: &ChainParams, period: f64, energy: f64) -> f64 {
    let l = params.half_length();
    let (xp, xm) = chebyshev_args(energy, period);
    scaled_cheb(l, xp, l) / scaled_cheb(l + 1, xp, l) - scaled_cheb(l + 1, xm, l) / scaled_cheb(l, xm, l)
}

/// Principal branch of `acosh`: `Re k >= 0`, `Im k` in `[0, pi]`.
pub fn principal_acosh(x: f64) -> c64 {
    if x >= 1.0 {
        c64::new(x.acosh(), 0.0)
    } else if x > -1.0 {
        c64::new(0.0, x.acos())
    } else {
        c64::new((-x).acosh(), PI)
    }
}

/// A zero of the characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiEnergyRoot {
    pub energy: f64,
    pub kappa_plus: c64,
    pub kappa_minus: c64,
    /// `|f(E)|` at the refined root.
    pub residual: f64,
    pub period: f64,
}

impl QuasiEnergyRoot {
    fn new(energy: f64, period: f64, params: &ChainParams) -> Self {
        let (xp, xm) = chebyshev_args(energy, period);
        QuasiEnergyRoot {
            energy,
            kappa_plus: principal_acosh(xp),
            kappa_minus: principal_acosh(xm),
            residual: characteristic_function(params, period, energy).abs(),
            period,
        }
    }
}

/// Default bracketing grid: `8L` cells.
pub fn default_grid_size(params: &ChainParams) -> usize {
    8 * params.half_length()
}

const MAX_GRID_DOUBLINGS: usize = 3;

/// All `2L` roots, ascending. The initial uniform grid spans the Gershgorin
/// interval of `h_F`; it is doubled up to three times when roots are missing.
pub fn characteristic_roots(params: &ChainParams, period: f64, grid_size: usize) -> Result<Vec<QuasiEnergyRoot>> {
    check_period(period)?;
    let l = params.half_length();
    if grid_size < 4 * l {
        return Err(invalid(format!("grid size must be >= 4L = {}, got {grid_size}", 4 * l)));
    }
    let expected = 2 * l;
    let mut cells = grid_size;
    let mut found = 0;
    for _ in 0..=MAX_GRID_DOUBLINGS {
        let energies = bracket_roots(period, l, cells);
        found = energies.len();
        if found == expected {
            return Ok(energies.into_iter().map(|e| QuasiEnergyRoot::new(e, period, params)).collect());
        }
        cells *= 2;
    }
    Err(Error::RootCountMismatch { found, expected })
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 1e-13 {
        let c = 0.5 * (a + b);
        if c <= a || c >= b {
            break;
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fa < 0.0) == (fc < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

/// Minimizes `sign * f` on `[a, b]` by golden-section search.
fn golden_min(f: &impl Fn(f64) -> f64, sign: f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = sign * f(c);
    let mut fd = sign * f(d);
    for _ in 0..200 {
        if b - a < 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = sign * f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = sign * f(d);
        }
        if fc < 0.0 || fd < 0.0 {
            break;
        }
    }
    if fc < fd {
        (c, fc * sign)
    } else {
        (d, fd * sign)
    }
}

/// Sign-change bracketing plus a search for pairs of close roots hidden
/// inside one cell (a local extremum of `g` that crosses zero).
fn bracket_roots(period: f64, l: usize, cells: usize) -> Vec<f64> {
    let w = PI / period;
    let lo = -2.0 * w - 1.0 - 1e-9;
    let hi = 1.0 + 1e-9;
    let g = |e: f64| bracketing_function(e, period, l);
    let grid: Vec<f64> = (0..=cells).map(|k| lo + (hi - lo) * k as f64 / cells as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&e| g(e)).collect();
    let mut roots = Vec::new();
    for k in 0..cells {
        let (a, b) = (grid[k], grid[k + 1]);
        let (ga, gb) = (vals[k], vals[k + 1]);
        if ga == 0.0 {
            roots.push(a);
            continue;
        }
        if (ga < 0.0) != (gb < 0.0) && gb != 0.0 {
            roots.push(bisect(&g, a, b, ga));
        }
    }
    if vals[cells] == 0.0 {
        roots.push(grid[cells]);
    }
    // hidden pairs: |g| dips towards zero at a grid point without a sign change
    for k in 1..cells {
        let (gp, gc, gn) = (vals[k - 1], vals[k], vals[k + 1]);
        let same = (gp < 0.0) == (gc < 0.0) && (gc < 0.0) == (gn < 0.0) && gc != 0.0;
        if !same || gc.abs() >= gp.abs() || gc.abs() > gn.abs() {
            continue;
        }
        let sign = gc.signum();
        let (em, gm) = golden_min(&g, sign, grid[k - 1], grid[k + 1]);
        if (gm < 0.0) != (sign < 0.0) && gm != 0.0 {
            roots.push(bisect(&g, grid[k - 1], em, gp));
            roots.push(bisect(&g, em, grid[k + 1], gm));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    roots
}

/// Unnormalized amplitudes `(A_j, B_j)`, `j = 1..L`, of the eigenvector at a
/// root: `psi_j = A_j + i B_j` and `psi_{2L+1-j} = i A_j + B_j`.
fn sinh_amplitudes(energy: f64, period: f64, l: usize) -> (Vec<f64>, Vec<f64>) {
    let (xp, xm) = chebyshev_args(energy, period);
    let d_plus = scaled_cheb(l + 1, xp, l);
    let d_minus = scaled_cheb(l, xm, l);
    let a = (1..=l).map(|j| scaled_cheb(j, xp, l) * d_minus).collect();
    let b = (1..=l).map(|j| scaled_cheb(j, xm, l) * d_plus).collect();
    (a, b)
}

/// Normalized eigenvector of `h_F` built from the closed-form amplitudes.
pub fn floquet_eigenvector(root: &QuasiEnergyRoot, params: &ChainParams) -> Result<Vec<c64>> {
    let l = params.half_length();
    let (a, b) = sinh_amplitudes(root.energy, root.period, l);
    let norm2: f64 = 2.0 * a.iter().zip(&b).map(|(x, y)| x * x + y * y).sum::<f64>();
    if !(norm2.is_finite() && norm2 > 1e-280) {
        return Err(Error::NormalizationUnderflow(root.energy));
    }
    let inv = 1.0 / norm2.sqrt();
    let n = 2 * l;
    let mut v = vec![ZERO; n];
    for j in 0..l {
        v[j] = c64::new(a[j] * inv, b[j] * inv);
        v[n - 1 - j] = c64::new(b[j] * inv, a[j] * inv);
    }
    Ok(v)
}

/// Lower-band effective Hamiltonian of `h_F` to second order in `T`
/// (`L x L`, in the mirror-bonding orbitals).
pub fn sw_effective_hamiltonian(params: &ChainParams, period: f64) -> Result<CMat> {
    check_period(period)?;
    if period >= 1.0 {
        return Err(invalid(format!("effective Hamiltonian needs T < 1, got {period}")));
    }
    let l = params.half_length();
    let mut h = CMat::zeros(l, l);
    for j in 0..l {
        h[(j, j)] = c64::new(-2.0 * PI / period, 0.0);
    }
    h[(l - 1, l - 1)] -= c64::new(period / (8.0 * PI), 0.0);
    for j in 0..l - 1 {
        let mut t = -0.5 * params.hopping();
        if j == l - 2 {
            t += period * period / (64.0 * PI * PI);
        }
        h[(j, j + 1)] = c64::new(t, 0.0);
        h[(j + 1, j)] = c64::new(t, 0.0);
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageEnergyMethod {
    /// Expectation values of `h(0)` in numerically diagonalized eigenvectors.
    Numeric,
    /// Closed-form Chebyshev sums at the characteristic roots.
    Analytic,
}

/// Single-particle average energies `theta_n` and `H_K = sum theta_n |psi_n><psi_n|`.
#[derive(Debug, Clone)]
pub struct KatoSP {
    theta: Vec<f64>,
    quasienergies: Vec<f64>,
    vectors: CMat,
    hamiltonian: CMat,
}

impl KatoSP {
    fn assemble(mut records: Vec<(f64, f64, Vec<c64>)>) -> Self {
        records.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let n = records.first().map_or(0, |r| r.2.len());
        let vectors = CMat::from_fn(n, records.len(), |i, k| records[k].2[i]);
        let theta: Vec<f64> = records.iter().map(|r| r.0).collect();
        let quasienergies = records.iter().map(|r| r.1).collect();
        let scaled = CMat::from_fn(n, records.len(), |i, k| vectors[(i, k)] * theta[k]);
        let hamiltonian = &scaled * vectors.adjoint();
        KatoSP {
            theta,
            quasienergies,
            vectors,
            hamiltonian,
        }
    }

    /// Ascending average energies.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Quasienergy (eigenvalue of the Floquet Hamiltonian) of each state.
    pub fn quasienergies(&self) -> &[f64] {
        &self.quasienergies
    }

    /// Eigenvectors, one column per entry of [`theta`](Self::theta).
    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    pub fn hamiltonian(&self) -> MatRef<'_, c64> {
        self.hamiltonian.as_ref()
    }

    fn mass(&self, power: i32, select: impl Fn(usize, usize) -> bool) -> (f64, f64) {
        let h = &self.hamiltonian;
        let mut part = 0.0;
        let mut total = 0.0;
        for j in 0..h.ncols() {
            for i in 0..h.nrows() {
                let m = h[(i, j)].norm().powi(power);
                total += m;
                if select(i, j) {
                    part += m;
                }
            }
        }
        (part, total)
    }

    /// `sum_{|i-j|>1} |H_K|^2 / sum |H_K|^2`.
    pub fn off_tridiagonal_weight(&self) -> f64 {
        let (part, total) = self.mass(2, |i, j| i.abs_diff(j) > 1);
        part / total
    }

    /// `sum_{|i-j|>1} |H_K| / sum |H_K|`: the share of the magnitude map
    /// lying outside the tridiagonal band.
    pub fn off_tridiagonal_magnitude(&self) -> f64 {
        let (part, total) = self.mass(1, |i, j| i.abs_diff(j) > 1);
        part / total
    }

    /// Mean `|H_K|` on the anti-diagonal `i + j = 2L + 1` and mean over the
    /// remaining entries, both outside the tridiagonal band.
    pub fn anti_diagonal_contrast(&self) -> (f64, f64) {
        let h = &self.hamiltonian;
        let n = h.nrows();
        let (mut anti, mut na, mut rest, mut nr) = (0.0, 0usize, 0.0, 0usize);
        for j in 0..n {
            for i in 0..n {
                if i.abs_diff(j) <= 1 {
                    continue;
                }
                let m = h[(i, j)].norm();
                if i + j == n - 1 {
                    anti += m;
                    na += 1;
                } else {
                    rest += m;
                    nr += 1;
                }
            }
        }
        (anti / na.max(1) as f64, rest / nr.max(1) as f64)
    }

    /// `(i, j, |H_K|_ij)` with 1-based indices, row-major.
    pub fn magnitude_grid(&self) -> Vec<(usize, usize, f64)> {
        let h = &self.hamiltonian;
        let mut out = Vec::with_capacity(h.nrows() * h.ncols());
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                out.push((i + 1, j + 1, h[(i, j)].norm()));
            }
        }
        out
    }
}

/// Eigenvalue spacing below which eigenvectors are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-12;

/// Average energies of the harmonic drive, `theta_n = <psi_n| h(0) |psi_n>`,
/// equivalently `E_n + pi/T - (pi/T) <psi_n| sigma |psi_n>`.
pub fn average_energy_sp(params: &ChainParams, period: f64, method: AverageEnergyMethod) -> Result<KatoSP> {
    check_period(period)?;
    match method {
        AverageEnergyMethod::Numeric => numeric_average_energy(params, period),
        AverageEnergyMethod::Analytic => analytic_average_energy(params, period),
    }
}

fn numeric_average_energy(params: &ChainParams, period: f64) -> Result<KatoSP> {
    let hf = floquet_hamiltonian_exact(params, period)?;
    let evd = hermitian_eigen(hf.matrix())?;
    let mut vectors = evd.vectors.to_complex();
    let h0 = single_particle_hamiltonian(params, 1.0);
    let groups = clusters(&evd.values, DEGENERACY_TOL, None);
    resolve_degeneracies(&mut vectors, &groups, h0.as_ref())?;
    let theta = diagonal_expectations(vectors.as_ref(), h0.as_ref());
    let records = (0..theta.len())
        .map(|k| (theta[k], evd.values[k], (0..vectors.nrows()).map(|i| vectors[(i, k)]).collect()))
        .collect();
    Ok(KatoSP::assemble(records))
}

fn analytic_average_energy(params: &ChainParams, period: f64) -> Result<KatoSP> {
    let l = params.half_length();
    let w = PI / period;
    let roots = characteristic_roots(params, period, default_grid_size(params))?;
    let mut records = Vec::with_capacity(roots.len());
    for root in &roots {
        let (xp, xm) = chebyshev_args(root.energy, period);
        let d_plus = scaled_cheb(l + 1, xp, l);
        let d_minus = scaled_cheb(l, xm, l);
        let sum_a = d_minus * d_minus * scaled_square_sum(xp, l);
        let sum_b = d_plus * d_plus * scaled_square_sum(xm, l);
        let total = sum_a + sum_b;
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NormalizationUnderflow(root.energy));
        }
        let sigma = (sum_b - sum_a) / total;
        let theta = root.energy + w - w * sigma;
        records.push((theta, root.energy, floquet_eigenvector(root, params)?));
    }
    Ok(KatoSP::assemble(records))
}

/// Average energies and Kato Hamiltonian from numerically diagonalized `h_F`.
pub fn kato_hamiltonian_sp(params: &ChainParams, period: f64) -> Result<KatoSP> {
    average_energy_sp(params, period, AverageEnergyMethod::Numeric)
}

/// Eigenphase separation below which two-step Floquet modes are degenerate.
const PHASE_DEGENERACY_TOL: f64 = 1e-10;

/// Single-particle Floquet modes of a Hermitian two-step drive with
/// `theta_n = (<psi_n|h(1)|psi_n> + <psi_n|h(lambda)|psi_n>)/2`. Quasienergies
/// are folded into `(-pi/T, pi/T]`.
pub fn two_step_average_energy_sp(params: &ChainParams, drive: &DriveSpec) -> Result<KatoSP> {
    if !drive.is_two_step() || !drive.is_hermitian() {
        return Err(invalid("two-step average energies need a Hermitian two-step drive"));
    }
    let period = drive.period();
    let u = two_step_propagator(params, drive)?;
    let evd = unitary_eigen(u.matrix())?;
    let h0 = single_particle_hamiltonian(params, 1.0);
    let h1 = single_particle_hamiltonian(params, drive.lambda());
    let mean = CMat::from_fn(h0.nrows(), h0.ncols(), |i, j| 0.5 * (h0[(i, j)] + h1[(i, j)]));
    let phases: Vec<f64> = evd.values.iter().map(|z| z.arg()).collect();
    let groups = clusters(&phases, PHASE_DEGENERACY_TOL, Some(2.0 * PI));
    let mut vectors = evd.vectors;
    resolve_degeneracies(&mut vectors, &groups, mean.as_ref())?;
    let theta = diagonal_expectations(vectors.as_ref(), mean.as_ref());
    let records = (0..theta.len())
        .map(|k| {
            (
                theta[k],
                fold_quasienergy(-phases[k] / period, period),
                (0..vectors.nrows()).map(|i| vectors[(i, k)]).collect(),
            )
        })
        .collect();
    Ok(KatoSP::assemble(records))
}

/// Maps a quasienergy into `(-pi/T, pi/T]`.
pub fn fold_quasienergy(e: f64, period: f64) -> f64 {
    let w = 2.0 * PI / period;
    let mut f = e - w * (e / w).round();
    if f <= -0.5 * w {
        f += w;
    }
    if f > 0.5 * w {
        f -= w;
    }
    f
}
