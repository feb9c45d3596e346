//! Fixed-particle-number many-body Floquet spectra by exact diagonalization,
//! and the free-fermion shortcut through single-particle data.
//!
//! Basis states are occupation bitmasks: bit `j` set means site `j`
//! (0-based) is occupied. Fermionic signs follow the site ordering.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::f64::consts::PI;

use faer::c64;
use faer::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::floquet_analytics::two_step_average_energy_sp;
use crate::gaussian::ground_state;
use crate::linalg::{clusters, hermitian_eigen, unitary_eigen, CMat, HermitianEigen, ZERO};
use crate::model::{interaction_spec, single_particle_hamiltonian, ChainParams, DriveSpec, InteractionTerm};

/// Largest sector that is built densely.
pub const SECTOR_LIMIT: usize = 20_000;

/// States with an overlap below this are flagged grey.
pub const GREY_THRESHOLD: f64 = 0.002;

/// Occupation bitmasks with a fixed popcount, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    sites: usize,
    particles: usize,
    states: Vec<u64>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl SectorBasis {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        Self::with_limit(sites, particles, usize::MAX)
    }

    fn with_limit(sites: usize, particles: usize, limit: usize) -> Result<Self> {
        if sites == 0 || sites > 63 {
            return Err(invalid(format!("sector basis supports 1..=63 sites, got {sites}")));
        }
        if particles > sites {
            return Err(invalid(format!("{particles} particles exceed {sites} sites")));
        }
        let dim = binomial(sites, particles);
        if dim > limit as u128 {
            return Err(Error::SectorTooLarge {
                dim: usize::try_from(dim).unwrap_or(usize::MAX),
                limit,
            });
        }
        let mut states = Vec::with_capacity(dim as usize);
        if particles == 0 {
            states.push(0);
        } else {
            let top = 1u64 << sites;
            let mut s = (1u64 << particles) - 1;
            while s < top {
                states.push(s);
                // next mask with the same popcount
                let c = s & s.wrapping_neg();
                let r = s + c;
                s = (((r ^ s) >> 2) / c) | r;
            }
        }
        Ok(SectorBasis {
            sites,
            particles,
            states,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }
}

/// Dense operator on a sector.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    matrix: CMat,
    hermitian: bool,
}

impl SectorOperator {
    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `sum h_ij c_i^dag c_j + sum V n_a n_b` on a sector.
pub fn quadratic_plus_density(basis: &SectorBasis, h: MatRef<'_, c64>, terms: &[InteractionTerm]) -> CMat {
    let n = basis.sites();
    let dim = basis.len();
    let mut m = CMat::zeros(dim, dim);
    for (col, &s) in basis.states().iter().enumerate() {
        let mut diag = ZERO;
        for i in 0..n {
            if s >> i & 1 == 1 {
                diag += h[(i, i)];
            }
        }
        for t in terms {
            if s >> t.left & 1 == 1 && s >> t.right & 1 == 1 {
                diag += c64::new(t.strength, 0.0);
            }
        }
        m[(col, col)] = diag;
        for j in 0..n {
            if s >> j & 1 == 0 {
                continue;
            }
            for i in 0..n {
                let hij = h[(i, j)];
                if i == j || hij == ZERO || s >> i & 1 == 1 {
                    continue;
                }
                // c_i^dag c_j: sign from the occupied sites strictly between
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let between = if hi - lo > 1 { (s >> (lo + 1)) & ((1u64 << (hi - lo - 1)) - 1) } else { 0 };
                let sign = if between.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let target = (s & !(1u64 << j)) | (1u64 << i);
                let row = basis.index_of(target).expect("hopping preserves the sector");
                m[(row, col)] += hij * sign;
            }
        }
    }
    m
}

/// Fermionized XXZ chain with the impurity block `B(lambda)` at filling `n`.
/// The interaction strength is the chain's anisotropy.
pub fn build_sector_hamiltonian(params: &ChainParams, lambda: f64, particles: usize) -> Result<SectorOperator> {
    let basis = SectorBasis::with_limit(params.sites(), particles, SECTOR_LIMIT)?;
    let h = single_particle_hamiltonian(params, lambda);
    let matrix = quadratic_plus_density(&basis, h.as_ref(), &interaction_spec(params));
    Ok(SectorOperator {
        matrix,
        hermitian: lambda.abs() <= 1.0,
    })
}

fn require_hermitian_two_step(drive: &DriveSpec) -> Result<()> {
    if !drive.is_two_step() || !drive.is_hermitian() {
        return Err(invalid("many-body Floquet spectra need a Hermitian two-step drive"));
    }
    if drive.gauge_offset() != 0.0 {
        return Err(invalid("many-body Floquet spectra use the t0 = 0 gauge"));
    }
    Ok(())
}

const UNITARITY_TOL: f64 = 1e-9;

/// Real orthogonal matrix check, `max |W^T W - 1|`.
fn orthogonality_defect(w: MatRef<'_, f64>) -> f64 {
    let g = w.transpose() * w;
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - want).abs());
        }
    }
    worst
}

fn real_vectors(evd: &HermitianEigen) -> Result<Mat<f64>> {
    match &evd.vectors {
        crate::linalg::Eigenvectors::Real(v) => Ok(v.clone()),
        crate::linalg::Eigenvectors::Complex(_) => Err(invalid("sector Hamiltonian is not real")),
    }
}

/// Precomputed sector data for the two-step drive `lambda`: eigenbases of
/// `H_0 = H(1)` and `H_1 = H(lambda)` and the ground state of their average.
/// [`spectrum_at`](Self::spectrum_at) then costs one unitary
/// eigendecomposition per period.
pub struct SectorFloquetProblem {
    basis: SectorBasis,
    e0: Vec<f64>,
    e1: Vec<f64>,
    v0: Mat<f64>,
    v1: Mat<f64>,
    /// `V_1^T V_0`
    w: Mat<f64>,
    /// ground state of `(H_0 + H_1)/2` in the `H_0` eigenbasis
    reference: Vec<f64>,
    reference_energy: f64,
}

impl SectorFloquetProblem {
    pub fn new(params: &ChainParams, lambda: f64, particles: usize) -> Result<Self> {
        if lambda.abs() > 1.0 {
            return Err(invalid("many-body spectra need |lambda| <= 1"));
        }
        let basis = SectorBasis::with_limit(params.sites(), particles, SECTOR_LIMIT)?;
        let h0 = build_sector_hamiltonian(params, 1.0, particles)?.into_matrix();
        let h1 = build_sector_hamiltonian(params, lambda, particles)?.into_matrix();
        let mean = CMat::from_fn(h0.nrows(), h0.ncols(), |i, j| 0.5 * (h0[(i, j)] + h1[(i, j)]));
        let emean = hermitian_eigen(mean.as_ref())?;
        drop(mean);
        let ev0 = hermitian_eigen(h0.as_ref())?;
        drop(h0);
        let ev1 = hermitian_eigen(h1.as_ref())?;
        drop(h1);
        let v0 = real_vectors(&ev0)?;
        let v1 = real_vectors(&ev1)?;
        let vm = real_vectors(&emean)?;
        let w = v1.transpose() * &v0;
        let defect = orthogonality_defect(w.as_ref());
        if defect > UNITARITY_TOL {
            return Err(Error::NonNormalUnitary(defect));
        }
        let g = vm.col(0);
        let reference = (v0.transpose() * g).iter().copied().collect();
        Ok(SectorFloquetProblem {
            basis,
            e0: ev0.values,
            e1: ev1.values,
            v0,
            v1,
            w,
            reference,
            reference_energy: emean.values[0],
        })
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Lowest eigenvalue of `(H_0 + H_1)/2`.
    pub fn reference_energy(&self) -> f64 {
        self.reference_energy
    }

    /// `W^T D_1 W D_0`: the Floquet operator in the `H_0` eigenbasis.
    fn rotated_unitary(&self, period: f64) -> CMat {
        let d0: Vec<c64> = self.e0.iter().map(|&e| c64::from_polar(1.0, -0.5 * e * period)).collect();
        let d1: Vec<c64> = self.e1.iter().map(|&e| c64::from_polar(1.0, -0.5 * e * period)).collect();
        let dim = self.dim();
        // (D_1 W D_0) then W^T * that, as two real products
        let re = Mat::<f64>::from_fn(dim, dim, |m, k| (d1[m] * d0[k]).re * self.w[(m, k)]);
        let im = Mat::<f64>::from_fn(dim, dim, |m, k| (d1[m] * d0[k]).im * self.w[(m, k)]);
        let a = self.w.transpose() * &re;
        drop(re);
        let b = self.w.transpose() * &im;
        CMat::from_fn(dim, dim, |i, j| c64::new(a[(i, j)], b[(i, j)]))
    }

    /// `U_F = exp(-i H_1 T/2) exp(-i H_0 T/2)` in the occupation basis.
    pub fn unitary(&self, period: f64) -> Result<SectorOperator> {
        let core = self.rotated_unitary(period);
        let re = Mat::<f64>::from_fn(core.nrows(), core.ncols(), |i, j| core[(i, j)].re);
        let im = Mat::<f64>::from_fn(core.nrows(), core.ncols(), |i, j| core[(i, j)].im);
        drop(core);
        let left_re = &self.v0 * &re * self.v0.transpose();
        let left_im = &self.v0 * &im * self.v0.transpose();
        let matrix = CMat::from_fn(left_re.nrows(), left_re.ncols(), |i, j| c64::new(left_re[(i, j)], left_im[(i, j)]));
        Ok(SectorOperator {
            matrix,
            hermitian: false,
        })
    }

    /// Average-energy spectrum at period `T`, sorted by `theta`.
    pub fn spectrum_at(&self, period: f64) -> Result<ManyBodySpectrumTable> {
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid(format!("period T must be > 0, got {period}")));
        }
        let dim = self.dim();
        let u = self.rotated_unitary(period);
        let evd = unitary_eigen(u.as_ref())?;
        drop(u);
        let mut phi = evd.vectors;
        // Y = W Phi, so that <psi|H_1|psi> = sum_m E1_m |Y_mn|^2
        let mut y = real_times_complex(self.w.as_ref(), phi.as_ref());
        let phases: Vec<f64> = evd.values.iter().map(|z| z.arg()).collect();
        let groups = clusters(&phases, PHASE_DEGENERACY_TOL, Some(2.0 * PI));
        for g in groups.iter().filter(|g| g.len() > 1) {
            self.resolve_cluster(&mut phi, &mut y, g)?;
        }
        let mut records = Vec::with_capacity(dim);
        for n in 0..dim {
            let mut t0 = 0.0;
            let mut t1 = 0.0;
            let mut ov = ZERO;
            for k in 0..dim {
                t0 += self.e0[k] * phi[(k, n)].norm_sqr();
                t1 += self.e1[k] * y[(k, n)].norm_sqr();
                ov += phi[(k, n)].conj() * self.reference[k];
            }
            let u = evd.values[n];
            records.push(ManyBodyRecord {
                n: 0,
                phase: u,
                quasienergy: -u.arg() / period,
                theta: 0.5 * (t0 + t1),
                overlap: ov.norm_sqr(),
            });
        }
        Ok(ManyBodySpectrumTable::from_records(records, period))
    }

    /// Rotates a cluster of degenerate eigenphases to diagonalize the
    /// projected `(H_0 + H_1)/2`.
    fn resolve_cluster(&self, phi: &mut CMat, y: &mut CMat, group: &[usize]) -> Result<()> {
        let dim = self.dim();
        let mut cols = group.to_vec();
        cols.sort_unstable();
        let m = cols.len();
        let proj = CMat::from_fn(m, m, |a, b| {
            let (ca, cb) = (cols[a], cols[b]);
            let mut s = ZERO;
            for k in 0..dim {
                s += phi[(k, ca)].conj() * phi[(k, cb)] * self.e0[k] + y[(k, ca)].conj() * y[(k, cb)] * self.e1[k];
            }
            0.5 * s
        });
        let herm = CMat::from_fn(m, m, |a, b| 0.5 * (proj[(a, b)] + proj[(b, a)].conj()));
        let rot = hermitian_eigen(herm.as_ref())?.vectors.to_complex();
        for mat in [phi, y] {
            let block = CMat::from_fn(dim, m, |k, a| mat[(k, cols[a])]);
            let rotated = &block * &rot;
            for (a, &c) in cols.iter().enumerate() {
                for k in 0..dim {
                    mat[(k, c)] = rotated[(k, a)];
                }
            }
        }
        Ok(())
    }

    /// Occupation-basis eigenvectors are `V_0 Phi`; exposed for diagnostics.
    pub fn h1_basis(&self) -> MatRef<'_, f64> {
        self.v1.as_ref()
    }
}

const PHASE_DEGENERACY_TOL: f64 = 1e-8;

fn real_times_complex(a: MatRef<'_, f64>, b: MatRef<'_, c64>) -> CMat {
    let re = Mat::<f64>::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].re);
    let im = Mat::<f64>::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].im);
    let pr = a * &re;
    drop(re);
    let pi = a * &im;
    CMat::from_fn(pr.nrows(), pr.ncols(), |i, j| c64::new(pr[(i, j)], pi[(i, j)]))
}

/// Floquet unitary of the two-step drive on a particle-number sector.
pub fn floquet_unitary_mb(params: &ChainParams, drive: &DriveSpec, particles: usize) -> Result<SectorOperator> {
    require_hermitian_two_step(drive)?;
    let problem = SectorFloquetProblem::new(params, drive.lambda(), particles)?;
    problem.unitary(drive.period())
}

/// One Floquet eigenstate of a sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManyBodyRecord {
    /// Rank in ascending `theta`.
    pub n: usize,
    /// Eigenvalue of `U_F` on the unit circle.
    pub phase: c64,
    /// `-arg(u)/T` in `(-pi/T, pi/T]`.
    pub quasienergy: f64,
    pub theta: f64,
    /// `|<psi_n | gs((H_0 + H_1)/2)>|^2`
    pub overlap: f64,
}

impl ManyBodyRecord {
    pub fn is_grey(&self) -> bool {
        self.overlap < GREY_THRESHOLD
    }
}

#[derive(Debug, Clone)]
pub struct ManyBodySpectrumTable {
    records: Vec<ManyBodyRecord>,
    period: f64,
}

impl ManyBodySpectrumTable {
    fn from_records(mut records: Vec<ManyBodyRecord>, period: f64) -> Self {
        records.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.quasienergy.total_cmp(&b.quasienergy)));
        for (i, r) in records.iter_mut().enumerate() {
            r.n = i;
        }
        ManyBodySpectrumTable { records, period }
    }

    pub fn records(&self) -> &[ManyBodyRecord] {
        &self.records
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.theta).collect()
    }

    /// The lowest-`theta` state.
    pub fn ground(&self) -> &ManyBodyRecord {
        &self.records[0]
    }

    pub fn max_overlap(&self) -> f64 {
        self.records.iter().map(|r| r.overlap).fold(0.0, f64::max)
    }

    pub fn total_weight(&self) -> f64 {
        self.records.iter().map(|r| r.overlap).sum()
    }

    pub fn grey_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_grey()).count()
    }
}

/// Average-energy spectrum of the two-step drive on the sector with
/// `particles` fermions; interactions from the chain's anisotropy.
pub fn average_energy_spectrum_mb(
    params: &ChainParams,
    drive: &DriveSpec,
    particles: usize,
) -> Result<ManyBodySpectrumTable> {
    require_hermitian_two_step(drive)?;
    SectorFloquetProblem::new(params, drive.lambda(), particles)?.spectrum_at(drive.period())
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    sum: f64,
    mask: u64,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // reversed, so that BinaryHeap pops the smallest sum (then mask) first
    fn cmp(&self, other: &Self) -> Ordering {
        other.sum.total_cmp(&self.sum).then(other.mask.cmp(&self.mask))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn masked_sum(sorted: &[f64], mask: u64) -> f64 {
    let mut s = 0.0;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        s += sorted[i];
        m &= m - 1;
    }
    s
}

/// The `k` smallest sums of `n` distinct entries of `theta`, ascending.
/// Best-first search from the lowest filling; a move shifts one occupied
/// level to the next free one above it.
pub fn lowest_k_free_spectrum(theta: &[f64], n: usize, k: usize) -> Result<Vec<f64>> {
    let size = binomial(theta.len(), n);
    if theta.len() > 63 {
        return Err(invalid("at most 63 single-particle levels are supported"));
    }
    if n > theta.len() {
        return Err(invalid(format!("{n} particles exceed {} levels", theta.len())));
    }
    if k == 0 || k as u128 > size {
        return Err(Error::KOutOfRange {
            k,
            size: usize::try_from(size).unwrap_or(usize::MAX),
        });
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(invalid("single-particle energies must be finite"));
    }
    let mut sorted = theta.to_vec();
    sorted.sort_by(f64::total_cmp);
    let levels = sorted.len();
    let start = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    heap.push(Candidate {
        sum: masked_sum(&sorted, start),
        mask: start,
    });
    seen.insert(start);
    let mut out = Vec::with_capacity(k);
    while let Some(c) = heap.pop() {
        out.push(c.sum);
        if out.len() == k {
            break;
        }
        for i in 0..levels.saturating_sub(1) {
            if c.mask >> i & 1 == 1 && c.mask >> (i + 1) & 1 == 0 {
                let next = c.mask ^ (0b11u64 << i);
                if seen.insert(next) {
                    heap.push(Candidate {
                        sum: masked_sum(&sorted, next),
                        mask: next,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The `k` smallest subset sums over every particle number.
pub fn lowest_k_free_spectrum_all_fillings(theta: &[f64], k: usize) -> Result<Vec<f64>> {
    let total: u128 = 1u128 << theta.len().min(127);
    if k == 0 || k as u128 > total {
        return Err(Error::KOutOfRange {
            k,
            size: usize::try_from(total).unwrap_or(usize::MAX),
        });
    }
    let mut all = Vec::new();
    for n in 0..=theta.len() {
        let size = binomial(theta.len(), n);
        let take = (k as u128).min(size) as usize;
        all.extend(lowest_k_free_spectrum(theta, n, take)?);
    }
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    Ok(all)
}

/// Overlap of the lowest-`theta` free Floquet state at half filling with the
/// ground state of `(h(1) + h(lambda))/2`, from single-particle data:
/// `|det(Phi_F^dag Phi_0)|^2` with the `L` lowest-`theta` Floquet modes.
pub fn free_ground_overlap(params: &ChainParams, drive: &DriveSpec) -> Result<f64> {
    require_hermitian_two_step(drive)?;
    let l = params.half_length();
    let modes = two_step_average_energy_sp(params, drive)?;
    let h0 = single_particle_hamiltonian(params, 1.0);
    let h1 = single_particle_hamiltonian(params, drive.lambda());
    let mean = CMat::from_fn(h0.nrows(), h0.ncols(), |i, j| 0.5 * (h0[(i, j)] + h1[(i, j)]));
    let gs = ground_state(mean.as_ref(), l)?;
    let floquet = modes.vectors().subcols(0, l);
    let m = floquet.adjoint() * gs.orbitals();
    let det = m.determinant();
    Ok(det.norm_sqr())
}
