//! Prefix-product majorization and prefix-sum domination of positive,
//! non-increasing sequences.
//!
//! If every prefix product of `x` dominates the matching prefix product of
//! `y`, then every prefix sum does too. [`product_majorizes`] and
//! [`sum_dominates`] check the two sides, and [`powering_bounds`] evaluates
//! the power-sum inequality `(Σx)^L ≥ (Σy)^L / n!` in log form.

use rand::Rng;

use crate::error::{Error, Result};

/// Per-prefix relative slack used by [`product_majorizes`] (in log space).
pub const PRODUCT_REL_TOL: f64 = 1e-12;
/// Per-prefix absolute slack used by [`sum_dominates`].
pub const SUM_ABS_TOL: f64 = 1e-12;

/// Strictly positive, non-increasing sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveSortedSeq(Vec<f64>);

impl PositiveSortedSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("empty sequence".into()));
        }
        if let Some(k) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Precondition(format!(
                "entry {k} = {} is not strictly positive",
                values[k]
            )));
        }
        if let Some(k) = values.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::Precondition(format!("sequence increases at index {}", k + 1)));
        }
        Ok(PositiveSortedSeq(values))
    }

    /// Sorts descending, then validates.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        PositiveSortedSeq::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        PositiveSortedSeq::new(self.0.iter().map(|v| v * c).collect())
    }
}

/// Outcome of a prefix comparison, with the smallest failing `k` (1-based)
/// when it does not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixCheck {
    pub holds: bool,
    pub failing_k: Option<usize>,
}

impl PrefixCheck {
    fn from_failure(k: Option<usize>) -> Self {
        PrefixCheck {
            holds: k.is_none(),
            failing_k: k,
        }
    }
}

fn same_len(x: &PositiveSortedSeq, y: &PositiveSortedSeq) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("lengths {} and {}", x.len(), y.len())));
    }
    Ok(())
}

/// `∀k: x₁⋯x_k ≥ y₁⋯y_k`, evaluated as `Σ ln x ≥ Σ ln y − 1e-12·k`.
pub fn product_majorizes(x: &PositiveSortedSeq, y: &PositiveSortedSeq) -> Result<PrefixCheck> {
    same_len(x, y)?;
    let mut lx = 0.0;
    let mut ly = 0.0;
    let mut failing = None;
    for (k, (a, b)) in x.values().iter().zip(y.values()).enumerate() {
        lx += a.ln();
        ly += b.ln();
        if lx < ly - PRODUCT_REL_TOL * (k + 1) as f64 {
            failing = Some(k + 1);
            break;
        }
    }
    Ok(PrefixCheck::from_failure(failing))
}

/// `∀k: x₁+⋯+x_k ≥ y₁+⋯+y_k` with absolute slack 1e-12.
pub fn sum_dominates(x: &PositiveSortedSeq, y: &PositiveSortedSeq) -> Result<PrefixCheck> {
    same_len(x, y)?;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut failing = None;
    for (k, (a, b)) in x.values().iter().zip(y.values()).enumerate() {
        sx += a;
        sy += b;
        if sx < sy - SUM_ABS_TOL {
            failing = Some(k + 1);
            break;
        }
    }
    Ok(PrefixCheck::from_failure(failing))
}

/// `ln n!`, summed directly.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Returns `(L·ln Σx, L·ln Σy − ln n!)`. When `x` product-majorizes `y`
/// the first is at least the second.
pub fn powering_bounds(x: &PositiveSortedSeq, y: &PositiveSortedSeq, power: u32) -> Result<(f64, f64)> {
    if power == 0 {
        return Err(Error::Precondition("power must be positive".into()));
    }
    let check = product_majorizes(x, y)?;
    if !check.holds {
        return Err(Error::Precondition(format!(
            "x does not product-majorize y (fails at k = {})",
            check.failing_k.unwrap_or(0)
        )));
    }
    let l = f64::from(power);
    Ok((l * x.sum().ln(), l * y.sum().ln() - ln_factorial(x.len())))
}

/// Smallest `c ≥ 1` with `c·x` product-majorizing `y`:
/// `max_k (∏y_k / ∏x_k)^(1/k)`, floored at 1.
pub fn minimal_majorizing_scale(x: &PositiveSortedSeq, y: &PositiveSortedSeq) -> Result<f64> {
    same_len(x, y)?;
    let mut lx = 0.0;
    let mut ly = 0.0;
    let mut worst: f64 = 0.0;
    for (k, (a, b)) in x.values().iter().zip(y.values()).enumerate() {
        lx += a.ln();
        ly += b.ln();
        worst = worst.max((ly - lx) / (k + 1) as f64);
    }
    Ok(worst.exp())
}

/// Draws a pair `(x, y)` of length `n` with `x` product-majorizing `y`.
///
/// `y` is drawn first (positive, sorted). Then `x_k` is drawn in
/// `[max(∏y_{≤k}/∏x_{<k}, y_{k+1}), x_{k−1}]`: the lower end keeps prefix
/// products dominant and the `y_{k+1}` floor keeps the next interval
/// non-empty. With probability ¼ an entry sits on the lower end, giving
/// prefixes that are tight.
pub fn random_majorizing_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (PositiveSortedSeq, PositiveSortedSeq) {
    assert!(n >= 1);
    let mut y: Vec<f64> = (0..n).map(|_| (rng.random_range(-3.0..3.0_f64)).exp()).collect();
    y.sort_by(|a, b| b.total_cmp(a));

    let mut x = Vec::with_capacity(n);
    let mut log_excess = 0.0_f64; // ln(∏x_{<k} / ∏y_{<k}) ≥ 0
    for k in 0..n {
        let lower_prod = y[k] * (-log_excess).exp();
        let next = if k + 1 < n { y[k + 1] } else { 0.0 };
        let lower = lower_prod.max(next);
        let upper = if k == 0 { y[0] * rng.random_range(1.0..4.0) } else { x[k - 1] };
        let v: f64 = if rng.random_bool(0.25) || upper <= lower {
            lower.min(upper)
        } else {
            lower * (rng.random_range(0.0..1.0_f64) * (upper / lower).ln()).exp()
        };
        // Nudge off the boundary so rounding never leaves a prefix short.
        let v = v.max(lower * (1.0 + 4.0 * f64::EPSILON)).min(upper);
        log_excess += v.ln() - y[k].ln();
        x.push(v);
    }
    (
        PositiveSortedSeq::new(x).expect("generated x is positive and sorted"),
        PositiveSortedSeq::new(y).expect("generated y is positive and sorted"),
    )
}
