//! Upper bounds on vector discrepancy from the factorized SDP.
//!
//! The Gram matrix `X = UᵀU` with unit columns `u_j` ranges over every PSD
//! matrix with unit diagonal once `U` has `n` rows, so minimizing
//! `max_i ‖Σ_j A_ij u_j‖²` over unit columns solves the SDP exactly in
//! principle. The max is smoothed with log-sum-exp at temperature `μ`,
//! annealed geometrically, and minimized by Riemannian gradient descent on
//! the product of spheres. Any feasible `U` gives a valid upper bound, so
//! the reported value is always the true (unsmoothed) max of the best
//! iterate seen.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

/// Columns of a [`VectorColoring`] must have norm within this of 1.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Number of temperatures in the annealing schedule.
const MU_STAGES: usize = 16;

/// `n` unit vectors in `R^dim`, stored column after column.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorColoring {
    dim: usize,
    n: usize,
    data: Vec<f64>,
}

impl VectorColoring {
    /// Wraps column-major data, checking every column is a unit vector.
    pub fn new(dim: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || n == 0 || data.len() != dim * n {
            return Err(Error::Dimension(format!(
                "{} values for {n} vectors of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector coloring".into()));
        }
        let c = VectorColoring { dim, n, data };
        for j in 0..n {
            let norm = norm(c.vector(j));
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Precondition(format!("vector {j} has norm {norm}")));
            }
        }
        Ok(c)
    }

    /// Normalizes each column; fails on a zero column.
    pub fn normalized(dim: usize, n: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * n {
            return Err(Error::Dimension("vector coloring size".into()));
        }
        for col in data.chunks_mut(dim) {
            let s = norm(col);
            if s == 0.0 || !s.is_finite() {
                return Err(Error::Precondition("cannot normalize a zero vector".into()));
            }
            col.iter_mut().for_each(|v| *v /= s);
        }
        VectorColoring::new(dim, n, data)
    }

    /// The rank-one coloring `u_j = x_j e₁` induced by a sign vector.
    pub fn from_signs(signs: &[i8], dim: usize) -> Result<Self> {
        let mut data = vec![0.0; dim * signs.len()];
        for (j, &s) in signs.iter().enumerate() {
            data[j * dim] = f64::from(s);
        }
        VectorColoring::new(dim, signs.len(), data)
    }

    /// Interprets a `dim × n` matrix's columns as the vectors.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        VectorColoring::new(m.rows(), m.cols(), m.transpose().data().to_vec())
    }

    /// The `dim × n` matrix `U`.
    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.n);
        for j in 0..self.n {
            for (i, &v) in self.vector(j).iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `max_j |‖u_j‖² − 1|`.
pub fn feasibility_residual(u: &VectorColoring) -> f64 {
    raw_feasibility_residual(u.dim, &u.data)
}

pub(crate) fn raw_feasibility_residual(dim: usize, data: &[f64]) -> f64 {
    data.chunks(dim)
        .map(|c| (c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Row values `r_i = ‖Σ_j A_ij u_j‖²`, i.e. the diagonal of `A X Aᵀ`,
/// summed in column order from scratch.
pub fn row_values(a: &Matrix, u: &VectorColoring) -> Result<Vec<f64>> {
    check_shape(a, u.dim, &u.data)?;
    Ok(raw_row_values(a, u.dim, &u.data))
}

fn raw_row_values(a: &Matrix, dim: usize, u: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    (0..a.rows())
        .map(|i| {
            v.iter_mut().for_each(|x| *x = 0.0);
            for (j, &aij) in a.row(i).iter().enumerate() {
                for (vk, uk) in v.iter_mut().zip(&u[j * dim..(j + 1) * dim]) {
                    *vk += aij * uk;
                }
            }
            v.iter().map(|x| x * x).sum()
        })
        .collect()
}

fn check_shape(a: &Matrix, dim: usize, u: &[f64]) -> Result<()> {
    if dim == 0 || u.len() != dim * a.cols() {
        return Err(Error::Dimension(format!(
            "{} coloring values (dim {dim}) for a matrix with {} columns",
            u.len(),
            a.cols()
        )));
    }
    Ok(())
}

/// `f_μ(U) = μ·ln Σ_i exp(r_i/μ)` and its Euclidean gradient with respect to
/// every entry of `U` (same column-major layout).
pub fn objective_and_gradient(a: &Matrix, u: &VectorColoring, mu: f64) -> Result<(f64, Vec<f64>)> {
    objective_and_gradient_raw(a, u.dim, &u.data, mu)
}

/// As [`objective_and_gradient`] on unconstrained column-major data, for
/// points off the spheres (finite differences, line searches).
pub fn objective_and_gradient_raw(a: &Matrix, dim: usize, u: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
    if !(mu > 0.0) {
        return Err(Error::Precondition(format!("smoothing parameter {mu} must be positive")));
    }
    check_shape(a, dim, u)?;
    let mut work = Workspace::new(a.rows(), a.cols(), dim);
    let (f, _) = work.evaluate(a, u, mu, true);
    Ok((f, work.grad))
}

struct Workspace {
    dim: usize,
    /// `V = U Aᵀ`, column `i` is `Σ_j A_ij u_j`; stored row-of-A major.
    v: Vec<f64>,
    r: Vec<f64>,
    weights: Vec<f64>,
    grad: Vec<f64>,
}

impl Workspace {
    fn new(m: usize, n: usize, dim: usize) -> Self {
        Workspace {
            dim,
            v: vec![0.0; m * dim],
            r: vec![0.0; m],
            weights: vec![0.0; m],
            grad: vec![0.0; n * dim],
        }
    }

    /// Returns `(f_μ, max_i r_i)`; fills `grad` when asked.
    fn evaluate(&mut self, a: &Matrix, u: &[f64], mu: f64, with_grad: bool) -> (f64, f64) {
        let d = self.dim;
        for i in 0..a.rows() {
            let vi = &mut self.v[i * d..(i + 1) * d];
            vi.iter_mut().for_each(|x| *x = 0.0);
            for (j, &aij) in a.row(i).iter().enumerate() {
                if aij == 0.0 {
                    continue;
                }
                for (x, uj) in vi.iter_mut().zip(&u[j * d..(j + 1) * d]) {
                    *x += aij * uj;
                }
            }
            self.r[i] = vi.iter().map(|x| x * x).sum();
        }
        let rmax = self.r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (w, &ri) in self.weights.iter_mut().zip(&self.r) {
            *w = ((ri - rmax) / mu).exp();
            z += *w;
        }
        let f = rmax + mu * z.ln();
        if with_grad {
            self.weights.iter_mut().for_each(|w| *w /= z);
            self.grad.iter_mut().for_each(|g| *g = 0.0);
            for i in 0..a.rows() {
                let pi = self.weights[i];
                if pi == 0.0 {
                    continue;
                }
                let vi = &self.v[i * d..(i + 1) * d];
                for (j, &aij) in a.row(i).iter().enumerate() {
                    let c = 2.0 * pi * aij;
                    if c == 0.0 {
                        continue;
                    }
                    for (g, x) in self.grad[j * d..(j + 1) * d].iter_mut().zip(vi) {
                        *g += c * x;
                    }
                }
            }
        }
        (f, rmax)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Ambient dimension of the vectors; `None` means `n`.
    pub dim: Option<usize>,
    pub trials: usize,
    pub max_iters: usize,
    pub initial_step: f64,
    pub mu_initial: f64,
    pub mu_final: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dim: None,
            trials: 8,
            max_iters: 5000,
            initial_step: 0.1,
            mu_initial: 1.0,
            mu_final: 1e-3,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig {
            seed,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.trials > 0
            && self.max_iters > 0
            && self.initial_step > 0.0
            && self.mu_final > 0.0
            && self.tol > 0.0
            && self.dim != Some(0);
        if !positive {
            return Err(Error::Precondition(format!("invalid solver config {self:?}")));
        }
        if !(self.mu_final < self.mu_initial) {
            return Err(Error::Precondition("mu_final must be below mu_initial".into()));
        }
        Ok(())
    }

    fn mu_at(&self, stage: usize) -> f64 {
        let t = stage as f64 / (MU_STAGES - 1) as f64;
        self.mu_initial * (self.mu_final / self.mu_initial).powf(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalSolution {
    pub coloring: VectorColoring,
    /// `max(row_values)`: an upper bound on `vecdisc(A)²`.
    pub value: f64,
    pub row_values: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
    pub converged: bool,
    /// Norm of the projected gradient at the last iterate of the winning trial.
    pub grad_norm: f64,
    pub trial: usize,
}

struct TrialResult {
    best_u: Vec<f64>,
    iterations: usize,
    converged: bool,
    grad_norm: f64,
}

fn retract(dim: usize, u: &mut [f64]) {
    for col in u.chunks_mut(dim) {
        let s = norm(col);
        col.iter_mut().for_each(|x| *x /= s);
    }
}

/// Removes from each gradient column its component along `u_j`.
fn project_tangent(dim: usize, u: &[f64], g: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (uc, gc) in u.chunks(dim).zip(g.chunks_mut(dim)) {
        let dot: f64 = uc.iter().zip(gc.iter()).map(|(a, b)| a * b).sum();
        for (gi, ui) in gc.iter_mut().zip(uc) {
            *gi -= dot * ui;
            total += *gi * *gi;
        }
    }
    total.sqrt()
}

fn run_trial(a: &Matrix, dim: usize, cfg: &SolverConfig, trial: usize) -> TrialResult {
    let n = a.cols();
    let mut rng = rng::stream(cfg.seed, trial as u64);
    let mut u: Vec<f64> = loop {
        let cand: Vec<f64> = (0..dim * n).map(|_| rng.sample(StandardNormal)).collect();
        if cand.chunks(dim).all(|c| norm(c) > 1e-12) {
            break cand;
        }
    };
    retract(dim, &mut u);

    let mut work = Workspace::new(a.rows(), n, dim);
    let mut trial_u = vec![0.0; u.len()];
    let mut grad = vec![0.0; u.len()];
    let per_stage = (cfg.max_iters / MU_STAGES).max(1);
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    let mut converged = false;
    let mut grad_norm = f64::INFINITY;

    let (_, first_max) = work.evaluate(a, &u, cfg.mu_initial, false);
    let mut best_value = first_max;
    let mut best_u = u.clone();

    for stage in 0..MU_STAGES {
        let mu = cfg.mu_at(stage);
        let (mut f, _) = work.evaluate(a, &u, mu, true);
        grad.copy_from_slice(&work.grad);
        grad_norm = project_tangent(dim, &u, &mut grad);
        converged = false;
        for _ in 0..per_stage {
            if grad_norm <= 1e-12 {
                converged = true;
                break;
            }
            iterations += 1;
            let mut accepted = None;
            while step > 1e-16 {
                for ((t, x), g) in trial_u.iter_mut().zip(&u).zip(&grad) {
                    *t = x - step * g;
                }
                retract(dim, &mut trial_u);
                let (ft, tmax) = work.evaluate(a, &trial_u, mu, true);
                if ft < f {
                    accepted = Some((ft, tmax));
                    break;
                }
                step *= 0.5;
            }
            let Some((ft, tmax)) = accepted else {
                // No descent at any step length: stationary to working precision.
                converged = true;
                break;
            };
            std::mem::swap(&mut u, &mut trial_u);
            step = (step * 1.5).min(1e3);
            if tmax < best_value {
                best_value = tmax;
                best_u.copy_from_slice(&u);
            }
            let decrease = f - ft;
            f = ft;
            grad.copy_from_slice(&work.grad);
            grad_norm = project_tangent(dim, &u, &mut grad);
            if decrease <= cfg.tol * (1.0 + f.abs()) {
                converged = true;
                break;
            }
        }
    }

    TrialResult {
        best_u,
        iterations,
        converged,
        grad_norm,
    }
}

/// Best-of-`trials` factorized solve. The returned value is recomputed from
/// the returned coloring, not taken from solver state.
pub fn solve_vecdisc(a: &Matrix, cfg: &SolverConfig) -> Result<PrimalSolution> {
    cfg.validate()?;
    if a.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("input matrix".into()));
    }
    let n = a.cols();
    let dim = cfg.dim.unwrap_or(n);

    let results: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(a, dim, cfg, t))
        .collect();

    let mut best: Option<(usize, VectorColoring, Vec<f64>, f64)> = None;
    for (t, res) in results.iter().enumerate() {
        let mut u = res.best_u.clone();
        retract(dim, &mut u);
        let coloring = VectorColoring::new(dim, n, u)?;
        let rows = raw_row_values(a, dim, &coloring.data);
        let value = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if best.as_ref().is_none_or(|b| value < b.3) {
            best = Some((t, coloring, rows, value));
        }
    }
    let (trial, coloring, row_values, value) = best.expect("at least one trial");
    let res = &results[trial];
    Ok(PrimalSolution {
        coloring,
        value,
        row_values,
        iterations: res.iterations,
        seed: cfg.seed,
        converged: res.converged,
        grad_norm: res.grad_norm,
        trial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::new(m, n, (0..m * n).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    fn random_coloring(dim: usize, n: usize, seed: u64) -> VectorColoring {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        VectorColoring::normalized(dim, n, (0..dim * n).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    fn quick() -> SolverConfig {
        SolverConfig {
            trials: 2,
            max_iters: 800,
            ..SolverConfig::with_seed(3)
        }
    }

    #[test]
    fn tight_instance_is_exactly_one() {
        let a = Matrix::new(1, 1, vec![1.0]).unwrap();
        let sol = solve_vecdisc(&a, &quick()).unwrap();
        assert_eq!(sol.value, 1.0);
        assert_eq!(sol.value, sol.row_values.iter().copied().fold(f64::MIN, f64::max));
    }

    #[test]
    fn identity_is_forced_to_one() {
        let sol = solve_vecdisc(&Matrix::identity(4), &quick()).unwrap();
        assert!((sol.value - 1.0).abs() <= 1e-12);
        assert!(feasibility_residual(&sol.coloring) <= 2e-9);
    }

    #[test]
    fn cancelling_pair_reaches_zero() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = Matrix::new(1, 2, vec![h, h]).unwrap();
        let sol = solve_vecdisc(&a, &quick()).unwrap();
        assert!(sol.value <= 1e-6, "value {}", sol.value);
    }

    #[test]
    fn single_row_objective_is_the_row_value() {
        let a = random_matrix(1, 4, 1);
        let u = random_coloring(4, 4, 2);
        let (f, g) = objective_and_gradient(&a, &u, 0.3).unwrap();
        let r = row_values(&a, &u).unwrap()[0];
        assert!((f - r).abs() <= 1e-12 * (1.0 + r));
        // ∂r/∂u_j = 2 A_1j Σ_k A_1k u_k
        let v: Vec<f64> = (0..4)
            .map(|c| (0..4).map(|k| a.get(0, k) * u.vector(k)[c]).sum())
            .collect();
        for j in 0..4 {
            for c in 0..4 {
                let expect = 2.0 * a.get(0, j) * v[c];
                assert!((g[j * 4 + c] - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn small_mu_approaches_max() {
        for seed in 0..5 {
            let a = random_matrix(6, 5, seed);
            let u = random_coloring(5, 5, seed + 100);
            let rows = row_values(&a, &u).unwrap();
            let rmax = rows.iter().copied().fold(f64::MIN, f64::max);
            let (f, _) = objective_and_gradient(&a, &u, 1e-6).unwrap();
            assert!((f - rmax).abs() <= 1e-4);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        for seed in 0..4 {
            let a = random_matrix(5, 5, seed);
            let u = random_coloring(5, 5, seed + 7);
            let mu = 0.5;
            let (_, g) = objective_and_gradient(&a, &u, mu).unwrap();
            let h = 1e-6;
            let mut data = u.data().to_vec();
            let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for k in 0..data.len() {
                let orig = data[k];
                data[k] = orig + h;
                let fp = objective_and_gradient_raw(&a, 5, &data, mu).unwrap().0;
                data[k] = orig - h;
                let fm = objective_and_gradient_raw(&a, 5, &data, mu).unwrap().0;
                data[k] = orig;
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - g[k]).abs() <= 1e-5 * gmax, "entry {k}: fd {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn residual_of_scaled_column() {
        let mut data = vec![1.0, 0.0, 0.0, 1.0];
        assert_eq!(raw_feasibility_residual(2, &data), 0.0);
        data[2] = 0.0;
        data[3] = 1.001;
        let r = raw_feasibility_residual(2, &data);
        assert!((r - 2.001e-3).abs() <= 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = random_matrix(6, 6, 5);
        let s1 = solve_vecdisc(&a, &quick()).unwrap();
        let s2 = solve_vecdisc(&a, &quick()).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn rejects_bad_config() {
        let a = Matrix::identity(2);
        let cfg = SolverConfig { trials: 0, ..SolverConfig::default() };
        assert!(solve_vecdisc(&a, &cfg).is_err());
        let cfg = SolverConfig { mu_final: 2.0, ..SolverConfig::default() };
        assert!(solve_vecdisc(&a, &cfg).is_err());
        assert!(objective_and_gradient(&a, &random_coloring(2, 2, 0), 0.0).is_err());
    }

    #[test]
    fn coloring_validation() {
        assert!(VectorColoring::new(2, 1, vec![1.0, 1.0]).is_err());
        let c = VectorColoring::from_signs(&[1, -1, 1], 3).unwrap();
        assert_eq!(c.vector(1), &[-1.0, 0.0, 0.0]);
        assert_eq!(VectorColoring::from_matrix(&c.to_matrix()).unwrap(), c);
    }
}
