//! Instance generators.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

/// Gaussian entries, every column rescaled to unit norm.
pub fn gen_gaussian_unit(m: usize, n: usize, seed: u64) -> Matrix {
    assert!(m >= 1 && n >= 1, "gen_gaussian_unit needs m, n >= 1");
    let mut r = rng::stream(seed, 0);
    let mut out = Matrix::zeros(m, n);
    for j in 0..n {
        let col: Vec<f64> = loop {
            let c: Vec<f64> = (0..m).map(|_| r.sample(StandardNormal)).collect();
            if c.iter().any(|v: &f64| *v != 0.0) {
                break c;
            }
        };
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (i, v) in col.iter().enumerate() {
            out.set(i, j, v / norm);
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Incidence matrix of a random hypergraph with `n_edges` edges (rows) on
/// `n_vertices` vertices (columns) and maximum degree `t`.
///
/// Each vertex independently picks its edge set uniformly among the
/// non-empty subsets of at most `t` edges: a size `s` with probability
/// proportional to `C(n_edges, s)`, then a uniform `s`-subset. With
/// `scaled`, entries are `1/√t`, so column ℓ2 norms are at most one.
pub fn gen_beck_fiala(n_vertices: usize, n_edges: usize, t: usize, seed: u64, scaled: bool) -> Result<Matrix> {
    if n_vertices == 0 || n_edges == 0 || t == 0 {
        return Err(Error::Precondition(format!(
            "need n_vertices, n_edges, t >= 1 (got {n_vertices}, {n_edges}, {t})"
        )));
    }
    let max_size = t.min(n_edges);
    let weights: Vec<f64> = (1..=max_size).map(|s| binomial(n_edges, s)).collect();
    let total: f64 = weights.iter().sum();
    let entry = if scaled { 1.0 / (t as f64).sqrt() } else { 1.0 };

    let mut r = rng::stream(seed, 0);
    let mut out = Matrix::zeros(n_edges, n_vertices);
    for j in 0..n_vertices {
        let mut u = r.random_range(0.0..total);
        let mut size = max_size;
        for (k, w) in weights.iter().enumerate() {
            if u < *w {
                size = k + 1;
                break;
            }
            u -= w;
        }
        for e in index::sample(&mut r, n_edges, size) {
            out.set(e, j, entry);
        }
    }
    Ok(out)
}

/// All arithmetic progressions `{a, a+d, …}` inside `{1, …, N}` with
/// common difference `d ≤ max_difference`, one row each, singletons once.
/// Rows are ordered: singletons by start, then by `(d, start, length)`.
pub fn arithmetic_progressions(n: usize, max_difference: usize) -> Vec<Vec<usize>> {
    let mut rows: Vec<Vec<usize>> = (1..=n).map(|a| vec![a]).collect();
    for d in 1..=max_difference {
        for a in 1..=n {
            let mut ap = vec![a];
            while ap[ap.len() - 1] + d <= n {
                ap.push(ap[ap.len() - 1] + d);
                rows.push(ap.clone());
            }
        }
    }
    rows
}

/// Incidence matrix of the arithmetic progressions in `[N]` with
/// difference at most `⌊√N⌋`. With `scaled`, column `j` is divided by the
/// square root of its degree, giving unit column norms.
pub fn gen_arithmetic_progressions(n: usize, scaled: bool) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    let dmax = (n as f64).sqrt().floor() as usize;
    let rows = arithmetic_progressions(n, dmax);
    let mut out = Matrix::zeros(rows.len(), n);
    for (i, ap) in rows.iter().enumerate() {
        for &v in ap {
            out.set(i, v - 1, 1.0);
        }
    }
    if scaled {
        for j in 0..n {
            let degree: f64 = (0..rows.len()).map(|i| out.get(i, j)).sum();
            let s = 1.0 / degree.sqrt();
            for i in 0..rows.len() {
                if out.get(i, j) != 0.0 {
                    out.set(i, j, s);
                }
            }
        }
    }
    Ok(out)
}

/// The `1 × 1` matrix `(1)`, where vector discrepancy equals one.
pub fn gen_tight() -> Matrix {
    Matrix::identity(1)
}
