//! Exact combinatorial discrepancy `min_x ‖Ax‖_∞` over `x ∈ {±1}ⁿ`.
//!
//! Fixes `x₀ = +1` (the objective is invariant under `x ↦ −x`) and walks the
//! remaining `2^{n−1}` sign vectors in reflected Gray-code order, so each
//! step flips one sign and updates the row sums in `O(m)`. The walk can be
//! split into `2^k` segments by fixing the top `k` free signs; segments run
//! in parallel and are reduced in segment order.
//!
//! Incrementally updated sums drift for non-integer data, so a step only
//! becomes a candidate when its drifted value is within a guard band of the
//! incumbent, and candidates are compared on a from-scratch recomputation.
//! The result is therefore bit-identical to a naive enumeration.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DEFAULT_LIMIT: usize = 26;

/// Resynchronize incremental row sums after this many flips.
const RESYNC_MASK: u64 = (1 << 16) - 1;
/// Walks with at least this many free signs get split into segments.
const SPLIT_THRESHOLD: usize = 16;
const SPLIT_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignColoring {
    signs: Vec<i8>,
    value: f64,
}

impl SignColoring {
    /// Validates `signs` against `a` and computes the value.
    pub fn new(a: &Matrix, signs: Vec<i8>) -> Result<Self> {
        let value = disc_value(a, &signs)?;
        Ok(SignColoring { signs, value })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn negated(&self) -> Vec<i8> {
        self.signs.iter().map(|s| -s).collect()
    }
}

/// `‖Ax‖_∞`, recomputed from scratch with row sums in column order.
pub fn disc_value(a: &Matrix, signs: &[i8]) -> Result<f64> {
    if signs.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "{} signs for {} columns",
            signs.len(),
            a.cols()
        )));
    }
    if let Some(j) = signs.iter().position(|&s| s != 1 && s != -1) {
        return Err(Error::Precondition(format!("sign {j} is {}", signs[j])));
    }
    Ok(fresh_value(a, signs))
}

fn fresh_value(a: &Matrix, signs: &[i8]) -> f64 {
    (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(signs)
                .map(|(v, &s)| v * f64::from(s))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Integer data of moderate size sums exactly, so no guard band is needed.
fn is_exact(a: &Matrix) -> bool {
    a.data().iter().all(|v| v.fract() == 0.0 && v.abs() < (1u64 << 20) as f64)
}

struct Segment {
    value: f64,
    signs: Vec<i8>,
}

fn walk_segment(a: &Matrix, low_bits: usize, top_bits: usize, segment: u64, guard: f64) -> Segment {
    let (m, n) = (a.rows(), a.cols());
    let mut x = vec![1i8; n];
    for b in 0..top_bits {
        if segment >> b & 1 == 1 {
            x[1 + low_bits + b] = -1;
        }
    }
    let resync = |x: &[i8], sums: &mut [f64]| {
        for (i, s) in sums.iter_mut().enumerate() {
            *s = a.row(i).iter().zip(x).map(|(v, &sg)| v * f64::from(sg)).sum();
        }
    };
    let mut sums = vec![0.0; m];
    resync(&x, &mut sums);
    let mut best = Segment {
        value: fresh_value(a, &x),
        signs: x.clone(),
    };

    // Column-major copy for the O(m) update.
    let cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let steps: u64 = 1 << low_bits;
    for step in 1..steps {
        let col = 1 + step.trailing_zeros() as usize;
        x[col] = -x[col];
        if step & RESYNC_MASK == 0 {
            resync(&x, &mut sums);
        } else {
            let delta = 2.0 * f64::from(x[col]);
            for (s, v) in sums.iter_mut().zip(&cols[col]) {
                *s += delta * v;
            }
        }
        let threshold = best.value + guard;
        let candidate = if guard == 0.0 {
            sums.iter().all(|s| s.abs() < threshold)
        } else {
            sums.iter().all(|s| s.abs() <= threshold)
        };
        if candidate {
            let v = fresh_value(a, &x);
            if v < best.value {
                best.value = v;
                best.signs.copy_from_slice(&x);
            }
        }
    }
    best
}

/// Globally optimal sign coloring by exhaustive enumeration. Ties go to
/// the first coloring met in (segment, Gray) order.
pub fn disc_brute(a: &Matrix, limit_n: usize) -> Result<SignColoring> {
    let n = a.cols();
    if n > limit_n {
        return Err(Error::TooLarge { n, limit: limit_n });
    }
    if n > 63 {
        return Err(Error::TooLarge { n, limit: 63 });
    }
    let free = n - 1;
    let top_bits = if free >= SPLIT_THRESHOLD { SPLIT_BITS.min(free) } else { 0 };
    let low_bits = free - top_bits;

    let guard = if is_exact(a) {
        0.0
    } else {
        let max_row_sum = (0..a.rows())
            .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        1e-9 * max_row_sum
    };

    let segments: Vec<Segment> = (0..1u64 << top_bits)
        .into_par_iter()
        .map(|s| walk_segment(a, low_bits, top_bits, s, guard))
        .collect();
    let best = segments
        .into_iter()
        .reduce(|acc, s| if s.value < acc.value { s } else { acc })
        .expect("at least one segment");
    SignColoring::new(a, best.signs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancelling_row() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let c = disc_brute(&a, DEFAULT_LIMIT).unwrap();
        assert_eq!(c.signs(), &[1, -1]);
        assert_eq!(c.value(), 0.0);
    }

    #[test]
    fn identity_has_value_one() {
        assert_eq!(disc_brute(&Matrix::identity(2), DEFAULT_LIMIT).unwrap().value(), 1.0);
    }

    #[test]
    fn hadamard_rows() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = Matrix::from_rows(&[vec![h, h], vec![h, -h]]).unwrap();
        // All four colorings give max(|x₁+x₂|, |x₁−x₂|)/√2 = 2/√2.
        let c = disc_brute(&a, DEFAULT_LIMIT).unwrap();
        assert!((c.value() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn value_examples() {
        assert_eq!(disc_value(&Matrix::identity(3), &[1, 1, 1]).unwrap(), 1.0);
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(disc_value(&a, &[1, -1]).unwrap(), 0.0);
        assert!(disc_value(&a, &[1]).is_err());
        assert!(disc_value(&a, &[1, 0]).is_err());
    }

    #[test]
    fn too_large() {
        let a = Matrix::new(1, 5, vec![1.0; 5]).unwrap();
        assert!(matches!(disc_brute(&a, 4), Err(Error::TooLarge { n: 5, limit: 4 })));
    }

    #[test]
    fn single_column() {
        let a = Matrix::new(2, 1, vec![0.5, -2.0]).unwrap();
        let c = disc_brute(&a, DEFAULT_LIMIT).unwrap();
        assert_eq!(c.signs(), &[1]);
        assert_eq!(c.value(), 2.0);
    }

    #[test]
    fn split_walk_matches_unsplit_value() {
        // 17 columns forces segmenting; compare against a forced single walk.
        let n = 17;
        let data: Vec<f64> = (0..3 * n).map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let a = Matrix::new(3, n, data).unwrap();
        let split = disc_brute(&a, DEFAULT_LIMIT).unwrap();
        let single = walk_segment(&a, n - 1, 0, 0, 1e-9 * 100.0);
        assert_eq!(split.value(), single.value);
    }
}
