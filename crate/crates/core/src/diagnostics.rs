//! Classifiers and summary curves built on top of the simulations: heating
//! detection from entropy growth, revival periods, PT phase diagrams and
//! quasienergy gaps.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::floquet_analytics::{fold_quasienergy, quasienergy_gap};
use crate::gaussian::{evolve, floquet_propagator, half_chain_entropy, initial_state, segment_propagator, two_step_propagator};
use crate::linalg::{eigenvalues, unitary_eigen};
use crate::model::{ChainParams, DriveFamily, DriveSpec};

/// Shortest series any classifier accepts.
pub const MIN_SERIES_LEN: usize = 10;
/// Fewest samples a slope fit accepts.
pub const MIN_WINDOW_LEN: usize = 3;
/// Default fit window, in cycles, skipping the transient spreading from the defect.
pub const DEFAULT_WINDOW: (usize, usize) = (5, 60);
/// Default heating threshold on the entropy slope, nats per cycle.
pub const DEFAULT_SLOPE_THRESHOLD: f64 = 0.02;
/// Default revival prominence, relative to the range of the series.
pub const DEFAULT_PROMINENCE: f64 = 0.2;
/// Default tolerance on `||u| - 1|` for the PT-symmetric label.
pub const DEFAULT_PT_TOL: f64 = 1e-6;

/// Stroboscopic half-chain entropy: `entropies[n]` after `n` cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct EETimeSeries {
    entropies: Vec<f64>,
    period: f64,
    family: Option<DriveFamily>,
    lambda: Option<f64>,
}

impl EETimeSeries {
    pub fn new(entropies: Vec<f64>, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period T must be > 0, got {period}")));
        }
        if let Some(bad) = entropies.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(invalid(format!("entropies must be finite and >= 0, got {bad}")));
        }
        Ok(EETimeSeries {
            entropies,
            period,
            family: None,
            lambda: None,
        })
    }

    fn with_drive(mut self, drive: &DriveSpec) -> Self {
        self.family = Some(drive.family());
        self.lambda = Some(drive.lambda());
        self
    }

    pub fn entropies(&self) -> &[f64] {
        &self.entropies
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn family(&self) -> Option<DriveFamily> {
        self.family
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.entropies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entropies.is_empty()
    }

    /// Copy with `c` added to every entry, clipped at zero.
    pub fn shifted(&self, c: f64) -> Self {
        EETimeSeries {
            entropies: self.entropies.iter().map(|s| (s + c).max(0.0)).collect(),
            ..self.clone()
        }
    }
}

/// Half-chain entropy of the uniform half-filled ground state over `cycles`
/// periods of `drive`; the result holds `cycles + 1` samples. Non-unitary
/// drives renormalize the orbitals every cycle.
pub fn entropy_time_series(params: &ChainParams, drive: &DriveSpec, cycles: usize, n_sub: usize) -> Result<EETimeSeries> {
    let prop = floquet_propagator(params, drive, n_sub)?;
    let renorm = !prop.is_unitary();
    let mut state = initial_state(params)?;
    let mut out = Vec::with_capacity(cycles + 1);
    out.push(half_chain_entropy(&state)?);
    for _ in 0..cycles {
        state = evolve(&state, &prop, renorm)?;
        out.push(half_chain_entropy(&state)?);
    }
    Ok(EETimeSeries::new(out, drive.period())?.with_drive(drive))
}

/// Same trajectory sampled `samples` times per period, at `t = k T / samples`.
/// Returns `(t, S)` pairs including `t = 0`.
pub fn entropy_time_series_sampled(
    params: &ChainParams,
    drive: &DriveSpec,
    cycles: usize,
    samples: usize,
    n_sub: usize,
) -> Result<Vec<(f64, f64)>> {
    if samples == 0 {
        return Err(invalid("samples per period must be >= 1"));
    }
    let period = drive.period();
    let step = period / samples as f64;
    let mut pieces = Vec::with_capacity(samples);
    for k in 0..samples {
        let p = segment_propagator(params, drive, k as f64 * step, (k + 1) as f64 * step, n_sub)?;
        pieces.push(p);
    }
    let renorm = pieces.iter().any(|p| !p.is_unitary());
    let mut state = initial_state(params)?;
    let mut out = vec![(0.0, half_chain_entropy(&state)?)];
    for c in 0..cycles {
        for (k, p) in pieces.iter().enumerate() {
            state = evolve(&state, p, renorm)?;
            let t = c as f64 * period + (k + 1) as f64 * step;
            out.push((t, half_chain_entropy(&state)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    NonHeating,
    Heating,
    PTSymmetric,
    PTBroken,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::NonHeating => "non-heating",
            PhaseLabel::Heating => "heating",
            PhaseLabel::PTSymmetric => "pt-symmetric",
            PhaseLabel::PTBroken => "pt-broken",
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A classified point. Heating scores are entropy slopes (Heating iff above
/// the threshold); PT scores are `max ||u| - 1|` (PTSymmetric iff below).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub period: f64,
    pub lambda: f64,
    pub anisotropy: Option<f64>,
    pub label: PhaseLabel,
    pub score: f64,
}

/// Least-squares slope of `y` against `0, 1, 2, ...`.
pub fn linear_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Heating iff the slope over cycles `window.0..=window.1` exceeds
/// `threshold` nats per cycle.
pub fn classify_heating(series: &EETimeSeries, window: (usize, usize), threshold: f64) -> Result<PhasePoint> {
    let (start, end) = window;
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::WindowTooShort {
            start,
            end,
            len: series.len(),
            min: MIN_SERIES_LEN,
        });
    }
    let len = if end >= start && end < series.len() { end - start + 1 } else { 0 };
    if len < MIN_WINDOW_LEN {
        return Err(Error::WindowTooShort {
            start,
            end,
            len,
            min: MIN_WINDOW_LEN,
        });
    }
    let slope = linear_slope(&series.entropies()[start..=end]);
    Ok(PhasePoint {
        period: series.period(),
        lambda: series.lambda().unwrap_or(f64::NAN),
        anisotropy: None,
        label: if slope > threshold { PhaseLabel::Heating } else { PhaseLabel::NonHeating },
        score: slope,
    })
}

fn local_minima(s: &[f64], from: usize) -> Vec<usize> {
    (from.max(1)..s.len().saturating_sub(1))
        .filter(|&i| s[i] < s[i - 1] && s[i] <= s[i + 1])
        .collect()
}

/// Depth of the minimum at `i`: the lower of the two highest points reached
/// before the series drops below `s[i]` on each side, minus `s[i]`.
fn minimum_prominence(s: &[f64], i: usize) -> f64 {
    let mut left = s[i];
    for &v in s[..i].iter().rev() {
        if v < s[i] {
            break;
        }
        left = left.max(v);
    }
    let mut right = s[i];
    for &v in &s[i + 1..] {
        if v < s[i] {
            break;
        }
        right = right.max(v);
    }
    left.min(right) - s[i]
}

/// Cycles of the prominent entropy minima. The initial dip before the first
/// local maximum is a transient and is skipped; prominence is measured in
/// units of the full range of the series.
pub fn revival_minima(series: &EETimeSeries, min_prominence: f64) -> Vec<usize> {
    let s = series.entropies();
    if s.len() < 3 {
        return Vec::new();
    }
    let first_max = (1..s.len() - 1).find(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1]);
    let Some(first_max) = first_max else {
        return Vec::new();
    };
    let tail = &s[first_max..];
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = min_prominence * (hi - lo);
    local_minima(tail, 1)
        .into_iter()
        .filter(|&i| minimum_prominence(tail, i) >= cut && cut > 0.0)
        .map(|i| i + first_max)
        .collect()
}

/// Mean spacing of the revivals in physical time, counting `t = 0` as the
/// zeroth revival (the state starts at the revival point).
pub fn revival_period(series: &EETimeSeries, min_prominence: f64) -> Result<f64> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::WindowTooShort {
            start: 0,
            end: series.len().saturating_sub(1),
            len: series.len(),
            min: MIN_SERIES_LEN,
        });
    }
    let minima = revival_minima(series, min_prominence);
    let Some(&last) = minima.last() else {
        return Err(Error::NoRevivalDetected);
    };
    Ok(last as f64 / minima.len() as f64 * series.period())
}

/// Quasiparticle velocity of the XXZ chain, `(pi/2) sqrt(1 - D^2) / acos(D)`.
pub fn quasiparticle_velocity(anisotropy: f64) -> Result<f64> {
    if !(anisotropy.abs() < 1.0) {
        return Err(invalid(format!("velocity needs |Delta| < 1, got {anisotropy}")));
    }
    Ok(0.5 * PI * (1.0 - anisotropy * anisotropy).sqrt() / anisotropy.acos())
}

/// Revival time `2L / v(Delta)` of a chain with `sites = 2L`.
pub fn predicted_revival_time(sites: usize, anisotropy: f64) -> Result<f64> {
    Ok(sites as f64 / quasiparticle_velocity(anisotropy)?)
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, R^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// PT label of a two-step drive from its single-particle Floquet
/// eigenvalues.
pub fn pt_classify(params: &ChainParams, drive: &DriveSpec, tol: f64) -> Result<PhasePoint> {
    if !drive.is_two_step() {
        return Err(invalid("PT classification needs a two-step drive"));
    }
    let u = two_step_propagator(params, drive)?;
    let ev = eigenvalues(u.matrix())?;
    let score = ev.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(PhasePoint {
        period: drive.period(),
        lambda: drive.lambda(),
        anisotropy: None,
        label: if score < tol { PhaseLabel::PTSymmetric } else { PhaseLabel::PTBroken },
        score,
    })
}

fn two_step_drive(period: f64, lambda: f64) -> Result<DriveSpec> {
    if lambda > 1.0 {
        DriveSpec::non_hermitian(period, lambda)
    } else {
        DriveSpec::two_step(period, lambda)
    }
}

/// PT labels on a `lambdas x periods` grid, row-major in `lambda`.
#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    pub points: Vec<PhasePoint>,
    pub periods: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Gap-closing period of the Hermitian drive, drawn as a reference.
    pub reference_period: f64,
}

impl PhaseDiagram {
    pub fn row(&self, i: usize) -> &[PhasePoint] {
        let n = self.periods.len();
        &self.points[i * n..(i + 1) * n]
    }

    /// Midpoint between the last symmetric and the first broken period of
    /// row `i`; `None` if the row never breaks or is broken from the start.
    pub fn boundary(&self, i: usize) -> Option<f64> {
        let row = self.row(i);
        let k = row.iter().position(|p| p.label == PhaseLabel::PTBroken)?;
        if k == 0 {
            return None;
        }
        Some(0.5 * (row[k - 1].period + row[k].period))
    }

    /// Bracket `(T_sym, T_broken)` of the first break in row `i`.
    pub fn bracket(&self, i: usize) -> Option<(f64, f64)> {
        let row = self.row(i);
        let k = row.iter().position(|p| p.label == PhaseLabel::PTBroken)?;
        (k > 0).then(|| (row[k - 1].period, row[k].period))
    }
}

pub fn phase_diagram(params: &ChainParams, periods: &[f64], lambdas: &[f64], tol: f64) -> Result<PhaseDiagram> {
    if periods.is_empty() || lambdas.is_empty() {
        return Err(invalid("phase diagram grid is empty"));
    }
    let mut points = Vec::with_capacity(periods.len() * lambdas.len());
    for &lambda in lambdas {
        for &t in periods {
            points.push(pt_classify(params, &two_step_drive(t, lambda)?, tol)?);
        }
    }
    Ok(PhaseDiagram {
        points,
        periods: periods.to_vec(),
        lambdas: lambdas.to_vec(),
        reference_period: PI,
    })
}

/// Folded-spectrum gap of a Hermitian two-step drive: the widest empty arc
/// between quasienergies on the circle of circumference `2 pi / T`, minus the
/// mean level spacing. A finite-size proxy that is positive while a true
/// band gap survives the folding.
pub fn folded_gap(params: &ChainParams, drive: &DriveSpec) -> Result<f64> {
    if !drive.is_two_step() || !drive.is_hermitian() {
        return Err(invalid("folded gap needs a Hermitian two-step drive"));
    }
    let period = drive.period();
    let u = two_step_propagator(params, drive)?;
    let evd = unitary_eigen(u.matrix())?;
    let mut e: Vec<f64> = evd.values.iter().map(|z| fold_quasienergy(-z.arg() / period, period)).collect();
    e.sort_by(f64::total_cmp);
    let circle = 2.0 * PI / period;
    let n = e.len();
    let mut widest = e[0] + circle - e[n - 1];
    for k in 1..n {
        widest = widest.max(e[k] - e[k - 1]);
    }
    Ok(widest - circle / n as f64)
}

/// `(T, gap)` along `periods`: the band gap of the exact Floquet Hamiltonian
/// for the harmonic drive, the folded gap for two-step drives.
pub fn gap_curve(params: &ChainParams, family: DriveFamily, lambda: f64, periods: &[f64]) -> Result<Vec<(f64, f64)>> {
    periods
        .iter()
        .map(|&t| {
            let g = match family {
                DriveFamily::Harmonic => quasienergy_gap(params, t)?,
                DriveFamily::TwoStep => folded_gap(params, &DriveSpec::two_step(t, lambda)?)?,
                DriveFamily::NonHermitianTwoStep => return Err(invalid("gap curves need a Hermitian drive")),
            };
            Ok((t, g))
        })
        .collect()
}

/// Period above which a band of width `bandwidth` folds onto itself.
pub fn folding_threshold(bandwidth: f64) -> Result<f64> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(invalid(format!("bandwidth must be > 0, got {bandwidth}")));
    }
    Ok(2.0 * PI / bandwidth)
}
