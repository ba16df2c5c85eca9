//! Random-hyperplane rounding of a vector coloring to a sign coloring.
//!
//! No quality guarantee: the result is a heuristic upper bound on `disc(A)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::brute::{disc_value, SignColoring};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;
use crate::sdp::VectorColoring;

/// `x_j = sign(g·u_j)` for one Gaussian `g`, with `sign(0) = +1`.
fn round_once(u: &VectorColoring, g: &[f64]) -> Vec<i8> {
    (0..u.len())
        .map(|j| {
            let dot: f64 = u.vector(j).iter().zip(g).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Best of `trials` hyperplane roundings. Trial `t` draws its hyperplane
/// from stream `(seed, t)`, so a run with more trials sees a superset of
/// the hyperplanes of a run with fewer.
pub fn round_hyperplane(a: &Matrix, u: &VectorColoring, trials: usize, seed: u64) -> Result<SignColoring> {
    if trials == 0 {
        return Err(Error::Precondition("at least one rounding trial is required".into()));
    }
    if u.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "{} vectors for {} columns",
            u.len(),
            a.cols()
        )));
    }
    let results: Vec<(f64, Vec<i8>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, t as u64);
            let g: Vec<f64> = (0..u.dim()).map(|_| r.sample(StandardNormal)).collect();
            let x = round_once(u, &g);
            let v = disc_value(a, &x).expect("signs match the column count");
            (v, x)
        })
        .collect();
    let (_, best) = results
        .into_iter()
        .reduce(|acc, r| if r.0 < acc.0 { r } else { acc })
        .expect("trials > 0");
    SignColoring::new(a, best)
}
