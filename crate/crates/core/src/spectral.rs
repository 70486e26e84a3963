//! Jakes correlation matrices, their eigensystems, and truncation metrics.

use std::f64::consts::PI;

use crate::matrix::Matrix;
use crate::specfun::bessel_j0;
use crate::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 50;
const JACOBI_TOLERANCE: f64 = 1e-13;
/// Negative eigenvalues above `-NEGATIVE_CLAMP * λ₁` are treated as round-off.
const NEGATIVE_CLAMP: f64 = 1e-8;

/// Symmetric Toeplitz correlation matrix with unit diagonal, stored by its
/// first row.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    first_row: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn from_first_row(first_row: Vec<f64>) -> Result<Self> {
        match first_row.first() {
            None => return Err(Error::param("correlation matrix needs at least one port")),
            Some(&d) if (d - 1.0).abs() > 1e-12 => {
                return Err(Error::param(format!("diagonal must be 1, got {d}")))
            }
            _ => {}
        }
        if let Some(bad) = first_row.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(Error::param(format!("correlation entry {bad} outside [-1, 1]")));
        }
        Ok(CorrelationMatrix { first_row })
    }

    /// Identity correlation (independent ports).
    pub fn identity(n: usize) -> Result<Self> {
        let mut row = vec![0.0; n.max(1)];
        row[0] = 1.0;
        if n == 0 {
            return Err(Error::param("correlation matrix needs at least one port"));
        }
        Ok(CorrelationMatrix { first_row: row })
    }

    pub fn n(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.first_row[k.abs_diff(l)]
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |k, l| self.entry(k, l))
    }
}

/// Jakes spatial correlation `J0(2π|k-l|W/(N-1))` of `n` ports spread over a
/// normalised aperture `w`. A single port yields `[[1]]`.
pub fn jakes_matrix(n: usize, w: f64) -> Result<CorrelationMatrix> {
    if n == 0 {
        return Err(Error::param("port count must be positive"));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::param(format!("aperture must be positive, got {w}")));
    }
    if n == 1 {
        return CorrelationMatrix::identity(1);
    }
    let spacing = 2.0 * PI * w / (n - 1) as f64;
    let first_row = (0..n)
        .map(|d| bessel_j0(spacing * d as f64))
        .collect::<Result<Vec<_>>>()?;
    CorrelationMatrix::from_first_row(first_row)
}

/// Eigenvalues (descending) and orthonormal eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Matrix,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `N×N`, column `k` is the `k`-th eigenvector.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn truncate(&self, k: usize) -> Result<KLTruncation> {
        truncate(self, k)
    }

    /// `U Λ Uᵀ` rebuilt from the stored pairs.
    pub fn reconstruct(&self) -> Matrix {
        low_rank(&self.vectors, &self.values, self.n())
    }
}

/// Eigensystem of a correlation matrix. Output is bit-for-bit reproducible.
pub fn eigendecompose(r: &CorrelationMatrix) -> Result<EigenSystem> {
    eigendecompose_dense(&r.to_dense())
}

/// Eigensystem of any dense symmetric positive semidefinite matrix (used for
/// block-diagonal surrogates as well as Jakes matrices).
pub fn eigendecompose_dense(a: &Matrix) -> Result<EigenSystem> {
    let (mut values, vectors) = symmetric_eigen(a)?;
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -NEGATIVE_CLAMP * top {
                return Err(Error::numerical(format!(
                    "eigenvalue {v:e} is negative beyond round-off (λ₁ = {top}); matrix is not PSD"
                )));
            }
            *v = 0.0;
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Cyclic Jacobi eigensolver for a dense symmetric matrix.
///
/// Returns eigenvalues in descending order (stable on the original diagonal
/// index) and eigenvectors as columns. Each eigenvector is signed so that its
/// largest-magnitude entry is positive, the earliest index winning ties.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !a.is_square() {
        return Err(Error::param("eigensolver needs a square matrix"));
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * (a[(i, j)].abs() + a[(j, i)].abs()).max(1.0) {
                return Err(Error::param("eigensolver needs a symmetric matrix"));
            }
        }
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * m[(p, q)] * m[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOLERANCE * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::numerical(format!(
            "Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut best = 0;
        let mut best_mag = 0.0;
        for row in 0..n {
            let mag = v[(row, src)].abs();
            if mag > best_mag * (1.0 + 1e-12) {
                best = row;
                best_mag = mag;
            }
        }
        let sign = if v[(best, src)] < 0.0 { -1.0 } else { 1.0 };
        for row in 0..n {
            vectors[(row, col)] = sign * v[(row, src)];
        }
    }
    Ok((values, vectors))
}

/// Annihilates `m[p][q]` with one plane rotation, accumulating into `v`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = m.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        m[(k, p)] = new_kp;
        m[(p, k)] = new_kp;
        m[(k, q)] = new_kq;
        m[(q, k)] = new_kq;
    }
    m[(p, p)] = app - t * apq;
    m[(q, q)] = aqq + t * apq;
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Rank-`K` slice of an eigensystem.
#[derive(Debug, Clone, PartialEq)]
pub struct KLTruncation {
    values: Vec<f64>,
    vectors: Matrix,
    epsilon: f64,
    c1: f64,
}

impl KLTruncation {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// Port count `N`.
    pub fn n(&self) -> usize {
        self.vectors.rows()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `N×K` leading eigenvectors.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    /// Fraction of channel power in the discarded modes.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn power_fraction(&self) -> f64 {
        1.0 - self.epsilon
    }

    /// `max_n |u_{n,1}|²`, the peak of the dominant eigenvector. Within a
    /// near-degenerate leading pair this depends on the deterministic basis
    /// picked by the eigensolver.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// `U_K Λ_K U_Kᵀ`.
    pub fn covariance(&self) -> Matrix {
        low_rank(&self.vectors, &self.values, self.k())
    }
}

pub fn truncate(eig: &EigenSystem, k: usize) -> Result<KLTruncation> {
    let n = eig.n();
    if k == 0 || k > n {
        return Err(Error::param(format!("truncation order must be in 1..={n}, got {k}")));
    }
    let kept: f64 = eig.values[..k].iter().sum();
    let epsilon = (1.0 - kept / n as f64).clamp(0.0, 1.0);
    let c1 = (0..n)
        .map(|row| eig.vectors[(row, 0)].powi(2))
        .fold(0.0, f64::max);
    Ok(KLTruncation {
        values: eig.values[..k].to_vec(),
        vectors: eig.vectors.leading_columns(k),
        epsilon: if k == n { 0.0 } else { epsilon },
        c1,
    })
}

/// Smallest `K` whose leading eigenvalues hold at least `(1-eps0)·N`.
pub fn min_modes(eig: &EigenSystem, eps0: f64) -> Result<usize> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::param(format!("eps0 must lie in (0, 1), got {eps0}")));
    }
    let n = eig.n();
    let target = (1.0 - eps0) * n as f64;
    let mut acc = 0.0;
    for (i, v) in eig.values.iter().enumerate() {
        acc += v;
        if acc >= target {
            return Ok(i + 1);
        }
    }
    Ok(n)
}

/// Effective degrees of freedom `2⌈W⌉ + 1`.
pub fn dof_rule(w: f64) -> usize {
    2 * w.ceil().max(0.0) as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowRankErrors {
    pub frobenius: f64,
    pub operator: f64,
}

/// Frobenius and operator-norm error of the rank-`K` eigen-truncation.
pub fn lowrank_errors(eig: &EigenSystem, k: usize) -> Result<LowRankErrors> {
    let n = eig.n();
    if k == 0 || k > n {
        return Err(Error::param(format!("truncation order must be in 1..={n}, got {k}")));
    }
    let tail = &eig.values[k..];
    Ok(LowRankErrors {
        frobenius: tail.iter().map(|v| v * v).sum::<f64>().sqrt(),
        operator: tail.first().copied().unwrap_or(0.0),
    })
}

fn low_rank(vectors: &Matrix, values: &[f64], k: usize) -> Matrix {
    let n = vectors.rows();
    Matrix::from_fn(n, n, |i, j| {
        (0..k).map(|c| values[c] * vectors[(i, c)] * vectors[(j, c)]).sum()
    })
}
