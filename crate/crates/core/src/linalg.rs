//! Dense linear-algebra kernels.
//!
//! Everything here works on small, dense, row-major `f64` storage. The
//! symmetric eigensolver is cyclic Jacobi, which is slow asymptotically but
//! accurate to working precision and fully deterministic.

use crate::error::{Error, Result};

/// Relative threshold (against the largest singular value) below which a
/// Gram–Schmidt residual is treated as numerically zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Tolerance used by [`det_psd`] to decide that a matrix is PSD.
pub const DET_PSD_TOL: f64 = 1e-8;

const MAX_SWEEPS: usize = 60;

/// Dense `rows × cols` real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data. Rejects empty shapes, a data
    /// length that does not match, and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("{rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry ({}, {})", k / cols, k % cols)));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Matrix::new(m, n, rows.concat())
    }

    /// Internal constructor; may produce a zero-width matrix (e.g. the range
    /// basis of a zero matrix).
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// Euclidean norm of every column.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).powi(2)).sum::<f64>().sqrt())
            .collect()
    }

    pub fn max_column_norm(&self) -> f64 {
        self.column_norms().into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Keeps the listed columns, in the listed order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (c, &j) in idx.iter().enumerate() {
                out.set(i, c, self.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix::from_raw(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    /// `Aᵀ · diag(weights) · A` for a weight per row.
    pub fn weighted_gram(&self, weights: &[f64]) -> Result<SymMatrix> {
        if weights.len() != self.rows {
            return Err(Error::Dimension(format!(
                "{} row weights for {} rows",
                weights.len(),
                self.rows
            )));
        }
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for (i, &p) in weights.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let r = self.row(i);
            for a in 0..n {
                let pa = p * r[a];
                if pa == 0.0 {
                    continue;
                }
                for b in a..n {
                    g[a * n + b] += pa * r[b];
                }
            }
        }
        Ok(SymMatrix::from_upper(n, |a, b| g[a * n + b]))
    }
}

/// Symmetric `n × n` matrix. Both triangles are stored and kept bit-equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from a function evaluated on the upper triangle `i <= j`.
    pub fn from_upper(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { dim: n, data }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix::from_upper(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(values: &[f64]) -> Self {
        SymMatrix::from_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Checks a square matrix for exact symmetry and finiteness.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Dimension(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        let n = m.rows();
        for i in 0..n {
            for j in i + 1..n {
                let diff = (m.get(i, j) - m.get(j, i)).abs();
                if diff != 0.0 {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        Ok(SymMatrix::from_upper(n, |i, j| m.get(i, j)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SymMatrix::from_matrix(&Matrix::from_rows(rows)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[inline]
    pub(crate) fn set_diag(&mut self, i: usize, v: f64) {
        self.data[i * self.dim + i] = v;
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(SymMatrix::from_upper(self.dim, |i, j| self.get(i, j) - other.get(i, j)))
    }

    /// `M - diag(d)`.
    pub fn sub_diag(&self, d: &[f64]) -> SymMatrix {
        SymMatrix::from_upper(self.dim, |i, j| {
            if i == j {
                self.get(i, i) - d[i]
            } else {
                self.get(i, j)
            }
        })
    }

    /// `Uᵀ M U` for a `dim × k` matrix `U`.
    pub fn congruence(&self, u: &Matrix) -> Result<SymMatrix> {
        if u.rows() != self.dim {
            return Err(Error::Dimension(format!(
                "{}x{} congruence on dimension {}",
                u.rows(),
                u.cols(),
                self.dim
            )));
        }
        let mu = self.as_matrix().matmul(u)?;
        let k = u.cols();
        Ok(SymMatrix::from_upper(k, |a, b| {
            (0..self.dim).map(|i| u.get(i, a) * mu.get(i, b)).sum()
        }))
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_raw(self.dim, self.dim, self.data.clone())
    }

    /// Principal submatrix on the given indices.
    pub fn principal(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_upper(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// Eigenpairs of a symmetric matrix, values sorted non-increasing.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Column `k` pairs with `values[k]`.
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `max |Q diag(λ) Qᵀ - M|`.
    pub fn reconstruction_residual(&self, m: &SymMatrix) -> f64 {
        reconstruction_residual(m, &self.values, &self.vectors)
    }

    /// `max |QᵀQ - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let q = &self.vectors;
        let n = q.cols();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let dot: f64 = (0..q.rows()).map(|i| q.get(i, a) * q.get(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

fn reconstruction_residual(m: &SymMatrix, values: &[f64], q: &Matrix) -> f64 {
    let n = m.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r: f64 = (0..n).map(|k| q.get(i, k) * values[k] * q.get(j, k)).sum();
            worst = worst.max((r - m.get(i, j)).abs());
        }
    }
    worst
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eig_sym(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let floor = 1e-20 * frob;

    let mut converged = n <= 1 || frob == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= floor || apq.abs() <= f64::EPSILON * (app * aqq).abs().sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    a[k * n + p] = nkp;
                    a[p * n + k] = nkp;
                    a[k * n + q] = nkq;
                    a[q * n + k] = nkq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = !rotated;
    }

    // Stable sort: equal eigenvalues keep their Jacobi column order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, c, v[i * n + k]);
        }
    }

    if !converged {
        let residual = reconstruction_residual(m, &values, &vectors);
        if residual > 1e-9 * (1.0 + m.max_abs()) {
            return Err(Error::NumericalFailure { sweeps, residual });
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Smallest eigenvalue and a unit eigenvector for it.
pub fn min_eigenvalue(m: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::Dimension("empty matrix has no eigenvalues".into()));
    }
    let e = eig_sym(m)?;
    Ok((e.values[n - 1], e.vector(n - 1)))
}

pub fn is_psd(m: &SymMatrix, tol: f64) -> Result<bool> {
    if m.dim() == 0 {
        return Ok(true);
    }
    Ok(min_eigenvalue(m)?.0 >= -tol)
}

/// Determinant of a PSD matrix as the product of its eigenvalues, each
/// clamped at zero.
pub fn det_psd(m: &SymMatrix) -> Result<f64> {
    if m.dim() == 0 {
        return Ok(1.0);
    }
    let e = eig_sym(m)?;
    check_psd_values(&e.values)?;
    Ok(e.values.iter().map(|v| v.max(0.0)).product())
}

/// Natural log of [`det_psd`]; `-inf` for singular input. Does not
/// underflow for long products.
pub fn log_det_psd(m: &SymMatrix) -> Result<f64> {
    if m.dim() == 0 {
        return Ok(0.0);
    }
    let e = eig_sym(m)?;
    check_psd_values(&e.values)?;
    Ok(e.values.iter().map(|v| v.max(0.0).ln()).sum())
}

fn check_psd_values(values: &[f64]) -> Result<()> {
    let min = values.last().copied().unwrap_or(0.0);
    if min < -DET_PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

/// True when `M + shift·I` has a Cholesky factorization with strictly
/// positive pivots, i.e. when `λ_min(M) > -shift`.
pub fn cholesky_succeeds(m: &SymMatrix, shift: f64) -> bool {
    let n = m.dim();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m.get(j, j) + shift;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    true
}

/// Orthonormal basis of `range(A)` by modified Gram–Schmidt with one
/// re-orthogonalization pass, at the default rank threshold.
pub fn orthonormal_range_basis(a: &Matrix) -> Result<Matrix> {
    orthonormal_range_basis_with_tol(a, DEFAULT_RANK_TOL)
}

/// As [`orthonormal_range_basis`]; residual columns shorter than
/// `rel_tol · σ_max(A)` are dropped.
pub fn orthonormal_range_basis_with_tol(a: &Matrix, rel_tol: f64) -> Result<Matrix> {
    let m = a.rows();
    let gram = a.weighted_gram(&vec![1.0; m])?;
    let sigma_max = eig_sym(&gram)?.values.first().map_or(0.0, |v| v.max(0.0).sqrt());
    let threshold = rel_tol * sigma_max;

    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..a.cols() {
        let mut v = a.column(j);
        for _pass in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > threshold && norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }

    let r = basis.len();
    let mut u = Matrix::zeros(m, r);
    for (c, q) in basis.iter().enumerate() {
        for (i, &x) in q.iter().enumerate() {
            u.set(i, c, x);
        }
    }
    Ok(u)
}

/// Determinant of a square matrix by LU with partial pivoting.
pub fn det_lu(b: &Matrix) -> Result<f64> {
    if b.rows() != b.cols() {
        return Err(Error::Dimension(format!("{}x{} is not square", b.rows(), b.cols())));
    }
    let n = b.rows();
    let mut a = b.data().to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        let pv = a[pivot * n + col];
        if pv == 0.0 {
            return Ok(0.0);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det *= pv;
        for i in col + 1..n {
            let f = a[i * n + col] / pv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[i * n + k] -= f * a[col * n + k];
            }
        }
    }
    Ok(det)
}

/// `(|det B|, |det B| ≤ ∏ ‖b_j‖ + 1e-9)`.
pub fn hadamard_bound_check(b: &Matrix) -> Result<(f64, bool)> {
    let d = det_lu(b)?.abs();
    let bound: f64 = b.column_norms().iter().product();
    Ok((d, d <= bound + 1e-9))
}
