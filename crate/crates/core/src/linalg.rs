//! Dense complex linear algebra shared by every module: Hermitian
//! eigendecompositions, matrix exponentials, orthonormalization and the
//! eigendecomposition of unitary matrices.

use std::f64::consts::PI;

use faer::prelude::*;
use faer::{c64, Side};

use crate::error::{Error, Result};

/// Dense complex matrix; the representation of every single-particle and
/// sector operator in this crate.
pub type CMat = Mat<c64>;

pub(crate) const I: c64 = c64 { re: 0.0, im: 1.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// True if every entry has an exactly vanishing imaginary part.
pub fn is_real(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

/// `max_ij |m_ij - conj(m_ji)|`.
pub fn hermiticity_defect(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `max_ij |a_ij - b_ij|`.
pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// `max_ij |(U^dag U - I)_ij|`.
pub fn unitarity_defect(u: MatRef<'_, c64>) -> f64 {
    let n = u.ncols();
    let gram = u.adjoint() * u;
    max_abs_diff(gram.as_ref(), CMat::identity(n, n).as_ref())
}

pub fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a * b - b * a
}

pub(crate) fn scale(m: MatRef<'_, c64>, s: c64) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

fn real_part(m: MatRef<'_, c64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

fn to_complex(m: MatRef<'_, f64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Eigenvectors,
}

/// Eigenvectors are kept real when the input matrix was real symmetric, so
/// that exponentials and expectation values can use real products.
#[derive(Debug, Clone)]
pub enum Eigenvectors {
    Real(Mat<f64>),
    Complex(CMat),
}

impl Eigenvectors {
    pub fn to_complex(&self) -> CMat {
        match self {
            Eigenvectors::Real(v) => to_complex(v.as_ref()),
            Eigenvectors::Complex(v) => v.clone(),
        }
    }

    pub fn column(&self, k: usize) -> Vec<c64> {
        match self {
            Eigenvectors::Real(v) => (0..v.nrows()).map(|i| c64::new(v[(i, k)], 0.0)).collect(),
            Eigenvectors::Complex(v) => (0..v.nrows()).map(|i| v[(i, k)]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Eigenvectors::Real(v) => v.nrows(),
            Eigenvectors::Complex(v) => v.nrows(),
        }
    }

    /// `V f(D) V^dag` for a diagonal given per eigenvalue.
    pub fn reconstruct(&self, diag: &[c64]) -> CMat {
        match self {
            Eigenvectors::Real(v) => {
                let n = v.nrows();
                let re_scaled = Mat::<f64>::from_fn(n, v.ncols(), |i, k| v[(i, k)] * diag[k].re);
                let im_scaled = Mat::<f64>::from_fn(n, v.ncols(), |i, k| v[(i, k)] * diag[k].im);
                let re = &re_scaled * v.transpose();
                let im = &im_scaled * v.transpose();
                CMat::from_fn(n, n, |i, j| c64::new(re[(i, j)], im[(i, j)]))
            }
            Eigenvectors::Complex(v) => {
                let scaled = CMat::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * diag[k]);
                &scaled * v.adjoint()
            }
        }
    }
}

/// Diagonalizes a Hermitian matrix (only the lower triangle is read).
pub fn hermitian_eigen(m: MatRef<'_, c64>) -> Result<HermitianEigen> {
    if is_real(m) {
        let r = real_part(m);
        let evd = r.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenSolver)?;
        let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        Ok(HermitianEigen {
            values,
            vectors: Eigenvectors::Real(evd.U().to_owned()),
        })
    } else {
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenSolver)?;
        let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok(HermitianEigen {
            values,
            vectors: Eigenvectors::Complex(evd.U().to_owned()),
        })
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if is_real(m) {
        real_part(m)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::EigenSolver)
    } else {
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::EigenSolver)
    }
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<c64>> {
    m.eigenvalues().map_err(|_| Error::EigenSolver)
}

impl HermitianEigen {
    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> CMat {
        let diag: Vec<c64> = self
            .values
            .iter()
            .map(|&e| c64::from_polar(1.0, -e * t))
            .collect();
        self.vectors.reconstruct(&diag)
    }
}

/// `exp(-i h t)` for real symmetric `h` by a Taylor series split into its
/// real (cosine) and imaginary (sine) parts, with scaling and squaring.
/// Cheaper than an eigendecomposition for the short steps of a time-ordered
/// product; truncation stops once a term falls below 1e-18 relative.
pub fn exp_minus_i_real(h: MatRef<'_, f64>, t: f64) -> CMat {
    let n = h.nrows();
    let norm1 = (0..n).map(|j| (0..n).map(|i| h[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let squarings = if norm1 > 0.05 { (norm1 / 0.05).log2().ceil() as i32 } else { 0 };
    let x = Mat::<f64>::from_fn(n, n, |i, j| h[(i, j)] * t / 2f64.powi(squarings));
    let mut cos = Mat::<f64>::identity(n, n);
    let mut sin = Mat::<f64>::zeros(n, n);
    let mut term = Mat::<f64>::identity(n, n);
    for k in 1..=30 {
        term = (&term * &x) * (1.0 / k as f64);
        // (-i)^k: k = 1 -> -i, 2 -> -1, 3 -> +i, 4 -> +1
        match k % 4 {
            1 => sin -= &term,
            2 => cos -= &term,
            3 => sin += &term,
            _ => cos += &term,
        }
        let size = (0..n).map(|j| (0..n).map(|i| term[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
        if size < 1e-18 {
            break;
        }
    }
    let mut u = CMat::from_fn(n, n, |i, j| c64::new(cos[(i, j)], sin[(i, j)]));
    for _ in 0..squarings {
        u = &u * &u;
    }
    u
}

/// One Newton-Schulz step towards the nearest unitary, `U (3 - U^dag U) / 2`.
/// Removes the rounding drift of long products of unitary factors.
pub fn polish_unitary(u: MatRef<'_, c64>) -> CMat {
    let n = u.nrows();
    let g = u.adjoint() * u;
    let corr = CMat::from_fn(n, n, |i, j| {
        let e = if i == j { 3.0 } else { 0.0 };
        0.5 * (c64::new(e, 0.0) - g[(i, j)])
    });
    u * corr
}

/// `exp(-i H t)` for a Hermitian `H`, through its eigendecomposition.
pub fn expm_hermitian(h: MatRef<'_, c64>, t: f64) -> Result<CMat> {
    Ok(hermitian_eigen(h)?.propagator(t))
}

fn norm_one(m: MatRef<'_, c64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential of a general complex matrix by scaling and squaring
/// with a degree-13 Padé approximant (Higham 2005).
pub fn expm(a: MatRef<'_, c64>) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let n = a.nrows();
    let norm = norm_one(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = scale(a, c64::new(0.5f64.powi(squarings), 0.0));
    let eye = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let r = |x: f64| c64::new(x, 0.0);

    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> CMat {
        CMat::from_fn(n, n, |i, j| {
            r(c6) * a6[(i, j)] + r(c4) * a4[(i, j)] + r(c2) * a2[(i, j)] + r(c0) * eye[(i, j)]
        })
    };
    let u_inner = {
        let t = lin(B[13], B[11], B[9], 0.0);
        &a6 * &t + lin(B[7], B[5], B[3], B[1])
    };
    let u = &a * &u_inner;
    let v = {
        let t = lin(B[12], B[10], B[8], 0.0);
        &a6 * &t + lin(B[6], B[4], B[2], B[0])
    };
    let p = &v + &u;
    let q = &v - &u;
    let mut x = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        x = &x * &x;
    }
    x
}

/// `exp(-i H t)`; the eigendecomposition route is used for Hermitian `H`,
/// Padé otherwise.
pub fn exp_minus_i(h: MatRef<'_, c64>, t: f64) -> Result<CMat> {
    if hermiticity_defect(h) == 0.0 {
        expm_hermitian(h, t)
    } else {
        Ok(expm(scale(h, c64::new(0.0, -t)).as_ref()))
    }
}

/// Thin QR orthonormalization of the columns of `a`. The columns of the
/// result span the same space with the same orientation (positive real
/// diagonal of R). Fails when a column is numerically dependent.
pub fn orthonormalize(a: MatRef<'_, c64>, rank_tol: f64) -> Result<CMat> {
    let k = a.ncols();
    if k == 0 {
        return Ok(CMat::zeros(a.nrows(), 0));
    }
    let qr = a.qr();
    let r = qr.thin_R();
    let mut q = qr.compute_thin_Q();
    let scale_ref = (0..k).map(|j| r[(j, j)].norm()).fold(0.0, f64::max);
    let mut smallest = f64::INFINITY;
    for j in 0..k {
        let d = r[(j, j)];
        let mag = d.norm();
        smallest = smallest.min(mag);
        if mag <= rank_tol * scale_ref.max(1.0) || !mag.is_finite() {
            return Err(Error::RankDeficient(mag));
        }
        let phase = d / mag;
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    debug_assert!(smallest.is_finite());
    Ok(q)
}

/// Eigendecomposition of a unitary matrix: eigenvalues on the unit circle
/// and an orthonormal eigenbasis.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    pub values: Vec<c64>,
    pub vectors: CMat,
}

/// Diagonalizes a unitary (normal) matrix through the Hermitian Cayley
/// transform `M = i (1 - W)(1 + W)^{-1}`, `W = e^{i alpha} U`, whose
/// eigenvalues `tan(phi/2)` are in one-to-one correspondence with the
/// eigenphases `phi` of `W`. The rotation `alpha` is re-drawn when an
/// eigenvalue of `W` sits too close to -1.
pub fn unitary_eigen(u: MatRef<'_, c64>) -> Result<UnitaryEigen> {
    // Cayley transform of e^{i alpha} U; -1 must stay clear of the spectrum.
    // A poorly conditioned first try is repeated with -1 moved to the middle
    // of the widest gap between the estimated eigenphases.
    const FIRST_SHIFT: f64 = 0.7390851332;
    const FALLBACK: [f64; 4] = [2.0287578381, -1.3065629649, 2.7488935719, -0.4142135624];
    const WELL_CONDITIONED: f64 = 1e5;
    let n = u.nrows();
    let attempt = |alpha: f64| -> Result<(f64, HermitianEigen)> {
        let eye = CMat::identity(n, n);
        let w = scale(u, c64::from_polar(1.0, alpha));
        let plus = &eye + &w;
        let minus = &eye - &w;
        drop(w);
        let x = plus.partial_piv_lu().solve(&minus);
        drop(plus);
        drop(minus);
        let m = CMat::from_fn(n, n, |i, j| 0.5 * I * (x[(i, j)] - x[(j, i)].conj()));
        drop(x);
        let evd = hermitian_eigen(m.as_ref())?;
        let largest = evd.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok((if largest.is_finite() { largest } else { f64::INFINITY }, evd))
    };
    let phases_of = |evd: &HermitianEigen, alpha: f64| -> Vec<f64> {
        evd.values
            .iter()
            .map(|&mu| ((ONE + I * mu) / (ONE - I * mu)).arg() - alpha)
            .collect()
    };
    let mut alpha = FIRST_SHIFT;
    let (mut largest, mut evd) = attempt(alpha)?;
    if largest >= WELL_CONDITIONED && n > 0 {
        let mut ph: Vec<f64> = phases_of(&evd, alpha).iter().map(|p| p.rem_euclid(2.0 * PI)).collect();
        ph.sort_by(f64::total_cmp);
        let mut best_gap = ph[0] + 2.0 * PI - ph[n - 1];
        let mut mid = ph[n - 1] + 0.5 * best_gap;
        for k in 1..n {
            let gap = ph[k] - ph[k - 1];
            if gap > best_gap {
                best_gap = gap;
                mid = ph[k - 1] + 0.5 * gap;
            }
        }
        let candidates = std::iter::once(PI - mid).chain(FALLBACK.iter().copied());
        for a in candidates {
            let (l, e) = attempt(a)?;
            if l < largest {
                largest = l;
                evd = e;
                alpha = a;
            }
            if largest < WELL_CONDITIONED {
                break;
            }
        }
    }
    if !largest.is_finite() {
        return Err(Error::EigenSolver);
    }
    let unrot = c64::from_polar(1.0, -alpha);
    let values = evd
        .values
        .iter()
        .map(|&mu| {
            let w = (ONE + I * mu) / (ONE - I * mu);
            let z = w * unrot;
            z / z.norm()
        })
        .collect();
    Ok(UnitaryEigen {
        values,
        vectors: evd.vectors.to_complex(),
    })
}

/// Groups indices whose keys lie within `tol` of a neighbour, after sorting;
/// with `period` set the keys live on a circle of that circumference.
pub fn clusters(keys: &[f64], tol: f64, period: Option<f64>) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        match groups.last_mut() {
            Some(g) if keys[idx] - keys[*g.last().unwrap()] < tol => g.push(idx),
            _ => groups.push(vec![idx]),
        }
    }
    if let Some(p) = period {
        if groups.len() > 1 {
            let first = keys[groups[0][0]];
            let last_group = groups.last().unwrap();
            let last = keys[*last_group.last().unwrap()];
            if first + p - last < tol {
                let tail = groups.pop().unwrap();
                groups[0].extend(tail);
            }
        }
    }
    groups
}

/// Inside each cluster of (numerically) degenerate eigenvectors, rotate the
/// basis so that `op` is diagonal on the cluster. Columns are rewritten in
/// place, ordered by ascending projected eigenvalue.
pub fn resolve_degeneracies(vectors: &mut CMat, groups: &[Vec<usize>], op: MatRef<'_, c64>) -> Result<()> {
    let n = vectors.nrows();
    for g in groups.iter().filter(|g| g.len() > 1) {
        let mut cols = g.clone();
        cols.sort_unstable();
        let block = CMat::from_fn(n, cols.len(), |i, k| vectors[(i, cols[k])]);
        let projected = block.adjoint() * (op * &block);
        let herm = CMat::from_fn(cols.len(), cols.len(), |i, j| {
            0.5 * (projected[(i, j)] + projected[(j, i)].conj())
        });
        let evd = hermitian_eigen(herm.as_ref())?;
        let rotated = &block * evd.vectors.to_complex();
        for (k, &c) in cols.iter().enumerate() {
            for i in 0..n {
                vectors[(i, c)] = rotated[(i, k)];
            }
        }
    }
    Ok(())
}

/// `<v_k | op | v_k>` for every column `k`, real part.
pub fn diagonal_expectations(vectors: MatRef<'_, c64>, op: MatRef<'_, c64>) -> Vec<f64> {
    let applied = op * vectors;
    (0..vectors.ncols())
        .map(|k| {
            (0..vectors.nrows())
                .map(|i| (vectors[(i, k)].conj() * applied[(i, k)]).re)
                .sum()
        })
        .collect()
}
