//! Lower bounds on vector discrepancy and the machinery around them.
//!
//! A certificate is a distribution `p` over rows and weights `w` over
//! columns with `AᵀPA ⪰ W` (`P = diag(p)`, `W = diag(w)`). It proves
//! `vecdisc(A)² ≥ Σw`. For matrices whose columns have norm at most one, no
//! certificate can have `Σw > 1`: [`extract_witness`] produces the vector
//! `z` that breaks `zᵀAᵀPAz ≥ zᵀWz` for such an overweight pair, and
//! [`theorem_trace`] evaluates the determinant/majorization chain that
//! rules it out.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymMatrix};
use crate::majorization::{self, PositiveSortedSeq};
use crate::rng;

/// PSD tolerance for a certificate to count as valid.
pub const CERT_PSD_TOL: f64 = 1e-8;
/// A witness must beat the containment by at least this fraction of `rhs`.
pub const WITNESS_REL_MARGIN: f64 = 1e-10;
/// Slack on the final `Σw ≤ Σp ≤ 1` comparisons.
pub const ACCEPT_SLACK: f64 = 1e-6;
/// Column norms may exceed one by this much.
pub const COLUMN_NORM_SLACK: f64 = 1e-9;
/// Shift used by the Cholesky PSD test inside the certificate search.
const SEARCH_SHIFT: f64 = 1e-9;
const BISECTION_STEPS: usize = 30;
const MW_RATE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub p: Vec<f64>,
    pub w: Vec<f64>,
    #[serde(rename = "D")]
    pub d: f64,
}

impl DualCertificate {
    /// Checks well-formedness: `p` a distribution within `p_tol`, `D ≥ 0`,
    /// everything finite. Validity against a matrix is [`verify_certificate`].
    pub fn new(p: Vec<f64>, w: Vec<f64>, d: f64, p_tol: f64) -> Result<Self> {
        check_distribution(&p, p_tol)?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Certificate("w has a non-finite entry".into()));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::Certificate(format!("D = {d} must be finite and non-negative")));
        }
        Ok(DualCertificate { p, w, d })
    }

    /// `p` uniform, `w = 0`, `D = 0`.
    pub fn trivial(m: usize, n: usize) -> Self {
        DualCertificate {
            p: vec![1.0 / m as f64; m],
            w: vec![0.0; n],
            d: 0.0,
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.w.iter().sum()
    }
}

pub(crate) fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Certificate("p is empty".into()));
    }
    if let Some(i) = p.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Certificate(format!("p[{i}] = {} is not a probability", p[i])));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::Certificate(format!("p sums to {s}, not 1")));
    }
    Ok(())
}

fn check_dims(a: &Matrix, p: &[f64], w: &[f64]) -> Result<()> {
    if p.len() != a.rows() || w.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "certificate has |p| = {}, |w| = {} for a {}x{} matrix",
            p.len(),
            w.len(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

fn check_unit_columns(a: &Matrix) -> Result<()> {
    let worst = a.max_column_norm();
    if worst > 1.0 + COLUMN_NORM_SLACK {
        return Err(Error::Precondition(format!("a column has norm {worst} > 1")));
    }
    Ok(())
}

/// `AᵀPA − W`.
pub fn containment_matrix(a: &Matrix, p: &[f64], w: &[f64]) -> Result<SymMatrix> {
    check_dims(a, p, w)?;
    Ok(a.weighted_gram(p)?.sub_diag(w))
}

/// Result of [`verify_certificate`] with the quantities it looked at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub valid: bool,
    pub min_eigenvalue: f64,
    pub weight_sum: f64,
}

/// True iff `λ_min(AᵀPA − W) ≥ −tol` and `Σw ≥ D² − tol`.
pub fn verify_certificate(a: &Matrix, cert: &DualCertificate, tol: f64) -> Result<bool> {
    Ok(verify_certificate_detailed(a, cert, tol)?.valid)
}

pub fn verify_certificate_detailed(a: &Matrix, cert: &DualCertificate, tol: f64) -> Result<Verification> {
    if !(tol >= 0.0) {
        return Err(Error::Precondition(format!("tolerance {tol} must be non-negative")));
    }
    let m = containment_matrix(a, &cert.p, &cert.w)?;
    let (min_eigenvalue, _) = linalg::min_eigenvalue(&m)?;
    let weight_sum = cert.weight_sum();
    Ok(Verification {
        valid: min_eigenvalue >= -tol && weight_sum >= cert.d * cert.d - tol,
        min_eigenvalue,
        weight_sum,
    })
}

/// A vector `z` with `E_p[(Az)_i²] < Σ_j w_j z_j²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub z: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Both sides of the containment inequality at `z`, from scratch.
pub fn containment_sides(a: &Matrix, p: &[f64], w: &[f64], z: &[f64]) -> (f64, f64) {
    let lhs = (0..a.rows())
        .map(|i| {
            let s: f64 = a.row(i).iter().zip(z).map(|(x, y)| x * y).sum();
            p[i] * s * s
        })
        .sum();
    let rhs = w.iter().zip(z).map(|(wj, zj)| wj * zj * zj).sum();
    (lhs, rhs)
}

/// For unit-bounded columns and `Σw > 1`, finds `z` violating
/// `zᵀAᵀPAz ≥ zᵀWz`. Coordinates with `w_j ≤ 0` are fixed to zero and the
/// search runs on the remaining columns.
pub fn extract_witness(a: &Matrix, p: &[f64], w: &[f64]) -> Result<Witness> {
    check_dims(a, p, w)?;
    check_distribution(p, 1e-9)?;
    check_unit_columns(a)?;
    let total: f64 = w.iter().sum();
    if !(total > 1.0 + ACCEPT_SLACK) {
        return Err(Error::Precondition(format!(
            "Σw = {total} must exceed 1 by at least {ACCEPT_SLACK:e}"
        )));
    }

    let support: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
    let sub_a = a.select_columns(&support);
    let sub_w: Vec<f64> = support.iter().map(|&j| w[j]).collect();
    let m = sub_a.weighted_gram(p)?.sub_diag(&sub_w);
    let eig = linalg::eig_sym(&m)?;
    let k = eig.values.len();
    let min_eigenvalue = eig.values[k - 1];

    let embed = |v: &[f64]| {
        let mut z = vec![0.0; w.len()];
        for (&j, &x) in support.iter().zip(v) {
            z[j] = x;
        }
        z
    };
    let try_z = |v: Vec<f64>| -> Option<Witness> {
        let z = embed(&v);
        let (lhs, rhs) = containment_sides(a, p, w, &z);
        (rhs - lhs >= WITNESS_REL_MARGIN * rhs && lhs < rhs).then_some(Witness { z, lhs, rhs })
    };

    let bottom = eig.vector(k - 1);
    if let Some(wit) = try_z(bottom.clone()) {
        return Ok(wit);
    }
    if k >= 2 {
        let second = eig.vector(k - 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus: Vec<f64> = bottom.iter().zip(&second).map(|(a, b)| h * (a + b)).collect();
        let minus: Vec<f64> = bottom.iter().zip(&second).map(|(a, b)| h * (a - b)).collect();
        for cand in [second, plus, minus] {
            if let Some(wit) = try_z(cand) {
                return Ok(wit);
            }
        }
    }
    Err(Error::MarginNotFound { min_eigenvalue })
}

/// One prefix length `k` of the determinant chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub k: usize,
    /// `det(A_[k]ᵀ P A_[k])` (may underflow; see `log_det`).
    pub det: f64,
    pub log_det: f64,
    /// `ln(p₁⋯p_k)` over the sorted distribution.
    pub log_p_prefix: f64,
    /// `ln(w₁⋯w_k)` over the sorted positive weights.
    pub log_w_prefix: f64,
    /// `det ≤ p₁⋯p_k` (Hadamard + interlacing).
    pub det_below_p: bool,
    /// `det ≥ w₁⋯w_k` (determinant monotonicity under `⪰`).
    pub det_above_w: bool,
    /// `p₁⋯p_k ≥ w₁⋯w_k`.
    pub p_majorizes_w: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofTrace {
    /// Original column indices with positive weight, heaviest first.
    pub column_order: Vec<usize>,
    pub w_sorted: Vec<f64>,
    pub p_sorted: Vec<f64>,
    pub steps: Vec<TraceStep>,
    /// Sum of the largest `n'` entries of `p`, `n'` = number of positive weights.
    pub sum_p_top: f64,
    pub sum_w: f64,
    /// Prefix-product majorization of the top of `p` over `w`, checked
    /// independently by the majorization module.
    pub product_majorizes: bool,
    pub sum_dominates: bool,
    /// `Σw ≤ Σ_top p + slack ≤ 1 + slack`.
    pub sum_bound_holds: bool,
}

impl ProofTrace {
    pub fn all_flags(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.det_below_p && s.det_above_w && s.p_majorizes_w)
            && self.sum_bound_holds
    }
}

/// Descending order of `values` restricted to `idx`, ties by index.
fn sorted_desc(values: &[f64], mut idx: Vec<usize>) -> Vec<usize> {
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx
}

/// Evaluates the determinant chain for a pair `(p, w)` whose containment
/// `AᵀPA ⪰ W` holds (within [`CERT_PSD_TOL`]) on the positive weights.
///
/// Per-step comparisons are made in log space. The lower-bound side is
/// taken as `∏(w_j − τ)` with `τ` the PSD tolerance, which is what the
/// containment guarantees numerically.
pub fn theorem_trace(a: &Matrix, p: &[f64], w: &[f64]) -> Result<ProofTrace> {
    check_dims(a, p, w)?;
    check_distribution(p, 1e-9)?;
    check_unit_columns(a)?;

    let positive: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
    let column_order = sorted_desc(w, positive);
    let row_order = sorted_desc(p, (0..p.len()).collect());
    let w_sorted: Vec<f64> = column_order.iter().map(|&j| w[j]).collect();
    let p_sorted: Vec<f64> = row_order.iter().map(|&i| p[i]).collect();
    let n = column_order.len();

    let sorted_a = a.select_columns(&column_order);
    let gram = sorted_a.weighted_gram(p)?;
    if n > 0 {
        let (min_eig, _) = linalg::min_eigenvalue(&gram.sub_diag(&w_sorted))?;
        if min_eig < -CERT_PSD_TOL {
            return Err(Error::Precondition(format!(
                "containment fails: λ_min(AᵀPA − W) = {min_eig:e}; extract a witness instead"
            )));
        }
    }

    let tau = CERT_PSD_TOL;
    let mut steps = Vec::with_capacity(n);
    let mut log_p = 0.0;
    let mut log_w = 0.0;
    for k in 1..=n {
        let idx: Vec<usize> = (0..k).collect();
        let g_k = gram.principal(&idx);
        let log_det = linalg::log_det_psd(&g_k)?;
        let pk = p_sorted.get(k - 1).copied().unwrap_or(0.0);
        log_p += pk.ln();
        log_w += (w_sorted[k - 1] - tau).max(0.0).ln();
        let slack = 1e-8 * k as f64;
        steps.push(TraceStep {
            k,
            det: log_det.exp(),
            log_det,
            log_p_prefix: log_p,
            log_w_prefix: w_sorted[..k].iter().map(|v| v.ln()).sum(),
            det_below_p: log_det <= log_p + slack,
            det_above_w: log_det >= log_w - slack,
            p_majorizes_w: log_p >= log_w - 2.0 * slack,
        });
    }

    let sum_p_top: f64 = p_sorted.iter().take(n).sum();
    let sum_w: f64 = w_sorted.iter().sum();
    let (product_majorizes, sum_dominates) = if n == 0 {
        (true, true)
    } else if n <= p_sorted.len() && p_sorted[n - 1] > 0.0 {
        // Shrink w by τ, matching the tolerance the containment was checked at.
        let shrunk: Vec<f64> = w_sorted.iter().map(|v| (v - tau).max(f64::MIN_POSITIVE)).collect();
        let x = PositiveSortedSeq::new(p_sorted[..n].to_vec())?;
        let y = PositiveSortedSeq::new(shrunk)?;
        (
            majorization::product_majorizes(&x, &y)?.holds,
            majorization::sum_dominates(&x, &y)?.holds,
        )
    } else {
        (false, false)
    };

    Ok(ProofTrace {
        column_order,
        w_sorted,
        p_sorted,
        steps,
        sum_p_top,
        sum_w,
        product_majorizes,
        sum_dominates,
        sum_bound_holds: sum_w <= sum_p_top + ACCEPT_SLACK && sum_p_top <= 1.0 + ACCEPT_SLACK,
    })
}

/// Largest `δ ∈ [0, hi]` (by bisection) with `M − δ e_j e_jᵀ` passing the
/// shifted Cholesky test.
fn max_increment(m: &SymMatrix, j: usize, hi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, hi);
    let mut trial = m.clone();
    let base = m.get(j, j);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        trial.set_diag(j, base - mid);
        if linalg::cholesky_succeeds(&trial, SEARCH_SHIFT) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest `s ∈ [0, 1]` with `AᵀPA − sW` passing the shifted Cholesky test.
fn shrink_factor(gram: &SymMatrix, w: &[f64]) -> f64 {
    if linalg::cholesky_succeeds(&gram.sub_diag(w), SEARCH_SHIFT) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let scaled: Vec<f64> = w.iter().map(|v| v * mid).collect();
        if linalg::cholesky_succeeds(&gram.sub_diag(&scaled), SEARCH_SHIFT) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Heuristic dual search. Alternates greedy coordinate ascent on `w` with
/// a multiplicative-weights step on `p`, keeps the best pair seen, and
/// returns it only after [`verify_certificate`] accepts it at
/// [`CERT_PSD_TOL`]. Falls back to the trivial certificate.
pub fn search_certificate(a: &Matrix, iters: usize, seed: u64) -> Result<DualCertificate> {
    let (m, n) = (a.rows(), a.cols());
    let mut rng = rng::stream(seed, 0);
    let mut p = vec![1.0 / m as f64; m];
    let mut w = vec![0.0; n];
    let mut best = (0.0, p.clone(), w.clone());
    let mut order: Vec<usize> = (0..n).collect();

    for _round in 0..iters.max(1) {
        // (a) coordinate ascent on w for fixed p.
        let gram = a.weighted_gram(&p)?;
        let s = shrink_factor(&gram, &w);
        w.iter_mut().for_each(|v| *v *= s);
        let mut cm = gram.sub_diag(&w);
        order.shuffle(&mut rng);
        for &j in &order {
            let hi = cm.get(j, j) + 1.0;
            if hi <= 0.0 {
                continue;
            }
            let delta = max_increment(&cm, j, hi);
            if delta > 0.0 {
                w[j] += delta;
                cm.set_diag(j, gram.get(j, j) - w[j]);
            }
        }
        let total: f64 = w.iter().sum();
        if total > best.0 {
            best = (total, p.clone(), w.clone());
        }

        // (b) one multiplicative-weights step on p toward a larger λ_min.
        let (_, v) = linalg::min_eigenvalue(&cm)?;
        let g: Vec<f64> = (0..m)
            .map(|i| {
                let s: f64 = a.row(i).iter().zip(&v).map(|(x, y)| x * y).sum();
                s * s
            })
            .collect();
        let gmax = g.iter().copied().fold(0.0, f64::max);
        if gmax <= 0.0 {
            continue;
        }
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi *= (MW_RATE * gi / gmax).exp();
        }
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= z);
    }

    let (_, p, mut w) = best;
    // Final check with the eigensolver; scale w down until it passes.
    for _ in 0..60 {
        let d = w.iter().sum::<f64>().max(0.0).sqrt();
        let cert = DualCertificate { p: p.clone(), w: w.clone(), d };
        if verify_certificate(a, &cert, CERT_PSD_TOL)? {
            return Ok(cert);
        }
        w.iter_mut().for_each(|x| *x *= 0.5);
    }
    Ok(DualCertificate::trivial(m, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_gaussian_unit;

    fn one() -> Matrix {
        Matrix::new(1, 1, vec![1.0]).unwrap()
    }

    #[test]
    fn verify_examples() {
        let tight = DualCertificate::new(vec![1.0], vec![1.0], 1.0, 1e-12).unwrap();
        assert!(verify_certificate(&one(), &tight, 1e-8).unwrap());
        let over = DualCertificate::new(vec![1.0], vec![1.1], 1.05, 1e-12).unwrap();
        assert!(!verify_certificate(&one(), &over, 1e-8).unwrap());
        let a = gen_gaussian_unit(4, 3, 1);
        assert!(verify_certificate(&a, &DualCertificate::trivial(4, 3), 0.0).unwrap());
    }

    #[test]
    fn verify_rejects_dimension_mismatch() {
        let cert = DualCertificate::trivial(2, 2);
        assert!(matches!(verify_certificate(&one(), &cert, 1e-8), Err(Error::Dimension(_))));
    }

    #[test]
    fn claimed_bound_above_weights_is_invalid() {
        let cert = DualCertificate::new(vec![1.0], vec![0.5], 1.0, 1e-12).unwrap();
        assert!(!verify_certificate(&one(), &cert, 1e-8).unwrap());
    }

    #[test]
    fn negative_weights_are_accepted_by_verify() {
        let cert = DualCertificate::new(vec![0.5, 0.5], vec![0.5, -0.5], 0.0, 1e-12).unwrap();
        assert!(verify_certificate(&Matrix::identity(2), &cert, 0.0).unwrap());
    }

    #[test]
    fn witness_identity() {
        let wit = extract_witness(&Matrix::identity(2), &[0.5, 0.5], &[0.6, 0.6]).unwrap();
        assert!((wit.lhs - 0.5).abs() < 1e-12 && (wit.rhs - 0.6).abs() < 1e-12);
        let nonzero: Vec<_> = wit.z.iter().filter(|v| v.abs() > 1e-12).collect();
        assert_eq!(nonzero.len(), 1);
    }

    #[test]
    fn witness_scalar() {
        let wit = extract_witness(&one(), &[1.0], &[1.01]).unwrap();
        assert_eq!(wit.z.iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![1.0]);
        assert!((wit.lhs - 1.0).abs() < 1e-15 && (wit.rhs - 1.01).abs() < 1e-15);
    }

    #[test]
    fn witness_zeroes_nonpositive_weights() {
        let a = gen_gaussian_unit(3, 3, 4);
        let wit = extract_witness(&a, &[0.2, 0.3, 0.5], &[0.9, -0.5, 0.8]).unwrap();
        assert_eq!(wit.z[1], 0.0);
        let (lhs, rhs) = containment_sides(&a, &[0.2, 0.3, 0.5], &[0.9, -0.5, 0.8], &wit.z);
        assert!(lhs < rhs);
    }

    #[test]
    fn witness_uniform_weights_random() {
        let n = 10;
        let a = gen_gaussian_unit(10, n, 21);
        let p = vec![0.1; 10];
        let w = vec![1.01 / n as f64; n];
        let wit = extract_witness(&a, &p, &w).unwrap();
        let (lhs, rhs) = containment_sides(&a, &p, &w, &wit.z);
        assert!(lhs < rhs);
    }

    #[test]
    fn witness_preconditions() {
        assert!(matches!(extract_witness(&one(), &[1.0], &[1.0]), Err(Error::Precondition(_))));
        let big = Matrix::new(1, 1, vec![2.0]).unwrap();
        assert!(matches!(extract_witness(&big, &[1.0], &[1.5]), Err(Error::Precondition(_))));
    }

    #[test]
    fn trace_tight_case() {
        let t = theorem_trace(&one(), &[1.0], &[1.0]).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!((t.steps[0].det - 1.0).abs() < 1e-15);
        assert!(t.all_flags());
        assert_eq!(t.sum_w, 1.0);
    }

    #[test]
    fn trace_identity() {
        let t = theorem_trace(&Matrix::identity(2), &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!(t.all_flags());
        assert!(t.product_majorizes && t.sum_dominates);
        assert_eq!(t.sum_w, 1.0);
    }

    #[test]
    fn trace_rejects_failed_containment() {
        assert!(matches!(
            theorem_trace(&Matrix::identity(2), &[0.5, 0.5], &[0.6, 0.6]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn trace_sorts_with_index_ties() {
        let t = theorem_trace(&Matrix::identity(3), &[0.25, 0.5, 0.25], &[0.1, 0.2, 0.1]).unwrap();
        assert_eq!(t.column_order, vec![1, 0, 2]);
        assert_eq!(t.p_sorted, vec![0.5, 0.25, 0.25]);
        assert!(t.all_flags());
    }

    #[test]
    fn search_tight() {
        let cert = search_certificate(&one(), 10, 0).unwrap();
        assert!(cert.d >= 1.0 - 1e-6, "D = {}", cert.d);
        assert!(verify_certificate(&one(), &cert, CERT_PSD_TOL).unwrap());
    }

    #[test]
    fn search_identity() {
        let a = Matrix::identity(5);
        let cert = search_certificate(&a, 5, 1).unwrap();
        assert!(cert.d >= 1.0 - 1e-6, "D = {}", cert.d);
        assert!(cert.weight_sum() <= 1.0 + 1e-6);
    }

    #[test]
    fn search_cancelling_pair() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = Matrix::new(1, 2, vec![h, h]).unwrap();
        let cert = search_certificate(&a, 20, 2).unwrap();
        assert!(cert.d <= 1e-4, "D = {}", cert.d);
    }

    #[test]
    fn search_is_deterministic_and_valid() {
        let a = gen_gaussian_unit(6, 5, 8);
        let c1 = search_certificate(&a, 10, 9).unwrap();
        let c2 = search_certificate(&a, 10, 9).unwrap();
        assert_eq!(c1, c2);
        assert!(verify_certificate(&a, &c1, CERT_PSD_TOL).unwrap());
        assert!(c1.weight_sum() <= 1.0 + 1e-6);
    }
}
