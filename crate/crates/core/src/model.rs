//! Single-particle Hamiltonians of the driven two-site impurity, the drive
//! protocols, and the interaction terms of the fermionized XXZ chain.
//!
//! Sites are indexed `0..2L` in code. The impurity sits on the central bond
//! `(L-1, L)`. Sign convention: bulk bonds carry `-1/2`, and the impurity
//! block `B(lambda)` has off-diagonal `-lambda/2`, so `lambda = 1` is exactly the
//! uniform chain; the on-site terms are `+sqrt(1-lambda^2)/2` on site `L-1` and
//! `-sqrt(1-lambda^2)/2` on site `L`.

use std::f64::consts::PI;

use faer::c64;

use crate::error::{invalid, Error, Result};
use crate::linalg::CMat;
#[cfg(test)]
use crate::linalg::ZERO;

/// Open chain of `2L` sites with unit hopping and anisotropy `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    half_length: usize,
    hopping: f64,
    anisotropy: f64,
}

impl ChainParams {
    pub fn new(half_length: usize, anisotropy: f64) -> Result<Self> {
        if half_length < 2 {
            return Err(invalid(format!("half length L must be >= 2, got {half_length}")));
        }
        if !anisotropy.is_finite() {
            return Err(invalid("anisotropy must be finite"));
        }
        Ok(ChainParams {
            half_length,
            hopping: 1.0,
            anisotropy,
        })
    }

    /// Free chain, `delta = 0`.
    pub fn free(half_length: usize) -> Result<Self> {
        Self::new(half_length, 0.0)
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn sites(&self) -> usize {
        2 * self.half_length
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriveFamily {
    /// Uniform chain for the first half period, defect `lambda` for the second.
    TwoStep,
    /// `lambda(t) = cos(2 pi t / T)`, realized as a mirror rotation of `H(0)`.
    Harmonic,
    /// Two-step drive with `lambda > 1`: imaginary on-site potentials.
    NonHermitianTwoStep,
}

impl DriveFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            DriveFamily::TwoStep => "two-step",
            DriveFamily::Harmonic => "harmonic",
            DriveFamily::NonHermitianTwoStep => "non-hermitian",
        }
    }
}

impl std::str::FromStr for DriveFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-step" | "two_step" | "twostep" => Ok(DriveFamily::TwoStep),
            "harmonic" => Ok(DriveFamily::Harmonic),
            "non-hermitian" | "non_hermitian" | "non-hermitian-two-step" => Ok(DriveFamily::NonHermitianTwoStep),
            other => Err(invalid(format!("unknown drive family '{other}'"))),
        }
    }
}

impl std::fmt::Display for DriveFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Drive protocol. `gauge_offset` shifts the origin of the period: the
/// waveform seen at time `t` is the one at `t + t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    family: DriveFamily,
    period: f64,
    lambda: f64,
    gauge_offset: f64,
}

impl DriveSpec {
    pub fn new(family: DriveFamily, period: f64, lambda: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period T must be > 0, got {period}")));
        }
        if !lambda.is_finite() {
            return Err(invalid("lambda must be finite"));
        }
        match family {
            DriveFamily::TwoStep if lambda.abs() > 1.0 => {
                return Err(invalid(format!("two-step drive needs |lambda| <= 1, got {lambda}")))
            }
            DriveFamily::NonHermitianTwoStep if lambda <= 1.0 => {
                return Err(invalid(format!("non-Hermitian drive needs lambda > 1, got {lambda}")))
            }
            _ => {}
        }
        // The harmonic waveform carries no amplitude parameter.
        let lambda = if family == DriveFamily::Harmonic { 1.0 } else { lambda };
        Ok(DriveSpec {
            family,
            period,
            lambda,
            gauge_offset: 0.0,
        })
    }

    pub fn two_step(period: f64, lambda: f64) -> Result<Self> {
        Self::new(DriveFamily::TwoStep, period, lambda)
    }

    pub fn harmonic(period: f64) -> Result<Self> {
        Self::new(DriveFamily::Harmonic, period, 1.0)
    }

    pub fn non_hermitian(period: f64, lambda: f64) -> Result<Self> {
        Self::new(DriveFamily::NonHermitianTwoStep, period, lambda)
    }

    pub fn with_gauge_offset(mut self, t0: f64) -> Result<Self> {
        if !(t0 >= 0.0 && t0 < self.period) {
            return Err(invalid(format!("gauge offset must lie in [0, T), got {t0}")));
        }
        self.gauge_offset = t0;
        Ok(self)
    }

    pub fn family(&self) -> DriveFamily {
        self.family
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gauge_offset(&self) -> f64 {
        self.gauge_offset
    }

    pub fn is_two_step(&self) -> bool {
        matches!(self.family, DriveFamily::TwoStep | DriveFamily::NonHermitianTwoStep)
    }

    /// True when every instantaneous Hamiltonian is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.family != DriveFamily::NonHermitianTwoStep
    }

    /// Defect strength active at time `t` of a two-step drive.
    pub(crate) fn two_step_lambda_at(&self, t: f64) -> f64 {
        let phase = (t + self.gauge_offset).rem_euclid(self.period);
        if phase < 0.5 * self.period {
            1.0
        } else {
            self.lambda
        }
    }
}

/// The 2x2 impurity matrix acting on sites `(L-1, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityBlock(pub [[c64; 2]; 2]);

impl ImpurityBlock {
    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.0[i][j]
    }

    pub fn is_hermitian(&self) -> bool {
        let m = &self.0;
        m[0][0].im == 0.0 && m[1][1].im == 0.0 && m[0][1] == m[1][0].conj()
    }
}

pub fn impurity_block(lambda: f64) -> ImpurityBlock {
    let off = c64::new(-0.5 * lambda, 0.0);
    let onsite = if lambda.abs() <= 1.0 {
        c64::new(0.5 * (1.0 - lambda * lambda).max(0.0).sqrt(), 0.0)
    } else {
        c64::new(0.0, 0.5 * (lambda * lambda - 1.0).sqrt())
    };
    ImpurityBlock([[onsite, off], [off, -onsite]])
}

/// `H_L + H_R`: both half chains, without the central bond.
pub fn chain_halves(params: &ChainParams) -> CMat {
    let n = params.sites();
    let l = params.half_length();
    let t = c64::new(-0.5 * params.hopping(), 0.0);
    let mut h = CMat::zeros(n, n);
    for j in 0..n - 1 {
        if j == l - 1 {
            continue;
        }
        h[(j, j + 1)] = t;
        h[(j + 1, j)] = t;
    }
    h
}

/// `Gamma`: the hopping operator on the central bond.
pub fn bond_matrix(params: &ChainParams) -> CMat {
    let n = params.sites();
    let l = params.half_length();
    let mut g = CMat::zeros(n, n);
    g[(l - 1, l)] = c64::new(1.0, 0.0);
    g[(l, l - 1)] = c64::new(1.0, 0.0);
    g
}

/// `Omega`: the density imbalance between the two impurity sites.
pub fn imbalance_matrix(params: &ChainParams) -> CMat {
    let n = params.sites();
    let l = params.half_length();
    let mut o = CMat::zeros(n, n);
    o[(l - 1, l - 1)] = c64::new(1.0, 0.0);
    o[(l, l)] = c64::new(-1.0, 0.0);
    o
}

pub fn single_particle_hamiltonian(params: &ChainParams, lambda: f64) -> CMat {
    let l = params.half_length();
    let mut h = chain_halves(params);
    let b = impurity_block(lambda);
    for (a, row) in b.0.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            h[(l - 1 + a, l - 1 + c)] = v;
        }
    }
    h
}

/// Defect-free chain of `2L` sites.
pub fn uniform_chain(params: &ChainParams) -> CMat {
    single_particle_hamiltonian(params, 1.0)
}

/// Instantaneous single-particle Hamiltonian at time `t >= 0`.
pub fn hamiltonian_at(params: &ChainParams, drive: &DriveSpec, t: f64) -> Result<CMat> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    match drive.family() {
        DriveFamily::TwoStep | DriveFamily::NonHermitianTwoStep => {
            Ok(single_particle_hamiltonian(params, drive.two_step_lambda_at(t)))
        }
        DriveFamily::Harmonic => {
            let phase = 2.0 * PI * (t + drive.gauge_offset()) / drive.period();
            let (s, c) = phase.sin_cos();
            let mut h = chain_halves(params);
            let l = params.half_length();
            // -1/2 [cos Gamma - sin Omega]
            let bond = c64::new(-0.5 * c, 0.0);
            h[(l - 1, l)] = bond;
            h[(l, l - 1)] = bond;
            h[(l - 1, l - 1)] = c64::new(0.5 * s, 0.0);
            h[(l, l)] = c64::new(-0.5 * s, 0.0);
            Ok(h)
        }
    }
}

/// Density-density term `strength * n_left * n_right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionTerm {
    pub left: usize,
    pub right: usize,
    pub strength: f64,
}

/// Nearest-neighbour interactions on every bond, the driven bond included.
pub fn interaction_spec(params: &ChainParams) -> Vec<InteractionTerm> {
    let delta = params.anisotropy();
    if delta == 0.0 {
        return Vec::new();
    }
    (0..params.sites() - 1)
        .map(|j| InteractionTerm {
            left: j,
            right: j + 1,
            strength: delta,
        })
        .collect()
}

/// True if `m` has zero entries off the tridiagonal band and zero diagonal.
#[cfg(test)]
pub(crate) fn is_bare_hopping(m: &CMat) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) == 1 || m[(i, j)] == ZERO))
}
