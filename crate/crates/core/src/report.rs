//! The full pipeline report: primal solve, certificate search, optional
//! exhaustive discrepancy and hyperplane rounding, each re-checked from the
//! serialized data before the report is emitted.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::brute::{self, SignColoring};
use crate::dual::{self, DualCertificate, CERT_PSD_TOL};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::derive_seed;
use crate::rounding;
use crate::sdp::{self, PrimalSolution, SolverConfig, VectorColoring};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Smallest gap `√primal − D` tolerated before a report is rejected.
pub const GAP_FLOOR: f64 = -1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub source: String,
    pub rows: usize,
    pub cols: usize,
    pub max_column_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalReport {
    pub value: f64,
    pub sqrt_value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub trials: usize,
    pub feasibility_residual: f64,
    /// The vectors `u_j`, one inner array per column of the input.
    pub coloring: Vec<Vec<f64>>,
}

impl PrimalReport {
    pub fn from_solution(sol: &PrimalSolution, trials: usize) -> Self {
        let u = &sol.coloring;
        PrimalReport {
            value: sol.value,
            sqrt_value: sol.value.sqrt(),
            converged: sol.converged,
            iterations: sol.iterations,
            grad_norm: sol.grad_norm,
            trials,
            feasibility_residual: sdp::feasibility_residual(u),
            coloring: (0..u.len()).map(|j| u.vector(j).to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    #[serde(rename = "D")]
    pub d: f64,
    pub weight_sum: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub certificate: DualCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub value: f64,
    pub signs: Vec<i8>,
}

impl From<&SignColoring> for ColoringReport {
    fn from(c: &SignColoring) -> Self {
        ColoringReport {
            value: c.value(),
            signs: c.signs().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundedReport {
    pub label: String,
    pub trials: usize,
    pub value: f64,
    pub signs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub solve_ms: f64,
    pub certificate_ms: f64,
    pub brute_ms: Option<f64>,
    pub round_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub primal_recomputed: bool,
    pub primal_feasible: bool,
    pub dual_verified: bool,
    pub brute_recomputed: bool,
    pub rounded_recomputed: bool,
    pub gap_nonnegative: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.primal_recomputed
            && self.primal_feasible
            && self.dual_verified
            && self.brute_recomputed
            && self.rounded_recomputed
            && self.gap_nonnegative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub version: String,
    pub seed: u64,
    pub instance: InstanceInfo,
    pub primal: PrimalReport,
    pub dual: DualReport,
    /// `√primal − D`.
    pub gap: f64,
    pub brute: Option<ColoringReport>,
    pub rounded: Option<RoundedReport>,
    pub timings: Option<Timings>,
    pub checks: Checks,
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub seed: u64,
    pub trials: usize,
    pub max_iters: usize,
    pub cert_iters: usize,
    /// Run exhaustive enumeration when `n` is at most this.
    pub brute_limit: Option<usize>,
    /// Zero skips rounding.
    pub round_trials: usize,
    pub timings: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        let s = SolverConfig::default();
        ReportOptions {
            seed: 0,
            trials: s.trials,
            max_iters: s.max_iters,
            cert_iters: 50,
            brute_limit: Some(20),
            round_trials: 100,
            timings: true,
        }
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn build_report(a: &Matrix, source: &str, opts: &ReportOptions) -> Result<SolveReport> {
    let cfg = SolverConfig {
        trials: opts.trials,
        max_iters: opts.max_iters,
        ..SolverConfig::with_seed(derive_seed(opts.seed, 1))
    };
    let t = Instant::now();
    let sol = sdp::solve_vecdisc(a, &cfg)?;
    let solve_ms = ms(t);

    let t = Instant::now();
    let cert = dual::search_certificate(a, opts.cert_iters, derive_seed(opts.seed, 2))?;
    let certificate_ms = ms(t);
    let ver = dual::verify_certificate_detailed(a, &cert, CERT_PSD_TOL)?;

    let (brute, brute_ms) = match opts.brute_limit {
        Some(limit) if a.cols() <= limit => {
            let t = Instant::now();
            let c = brute::disc_brute(a, limit)?;
            (Some(ColoringReport::from(&c)), Some(ms(t)))
        }
        _ => (None, None),
    };

    let (rounded, round_ms) = if opts.round_trials > 0 {
        let t = Instant::now();
        let c = rounding::round_hyperplane(a, &sol.coloring, opts.round_trials, derive_seed(opts.seed, 3))?;
        (
            Some(RoundedReport {
                label: "heuristic upper bound".into(),
                trials: opts.round_trials,
                value: c.value(),
                signs: c.signs().to_vec(),
            }),
            Some(ms(t)),
        )
    } else {
        (None, None)
    };

    let mut report = SolveReport {
        version: VERSION.to_string(),
        seed: opts.seed,
        instance: InstanceInfo {
            source: source.to_string(),
            rows: a.rows(),
            cols: a.cols(),
            max_column_norm: a.max_column_norm(),
        },
        primal: PrimalReport::from_solution(&sol, opts.trials),
        gap: sol.value.sqrt() - cert.d,
        dual: DualReport {
            d: cert.d,
            weight_sum: ver.weight_sum,
            min_eigenvalue: ver.min_eigenvalue,
            iterations: opts.cert_iters,
            certificate: cert,
        },
        brute,
        rounded,
        timings: opts.timings.then_some(Timings {
            solve_ms,
            certificate_ms,
            brute_ms,
            round_ms,
        }),
        checks: Checks {
            primal_recomputed: false,
            primal_feasible: false,
            dual_verified: false,
            brute_recomputed: false,
            rounded_recomputed: false,
            gap_nonnegative: false,
        },
    };
    report.checks = check_report(a, &report)?;
    if !report.checks.all() {
        return Err(Error::Precondition(format!(
            "report failed its consistency checks: {:?}",
            report.checks
        )));
    }
    Ok(report)
}

/// Recomputes every reported quantity from the serialized pieces of the
/// report and the matrix alone.
pub fn check_report(a: &Matrix, report: &SolveReport) -> Result<Checks> {
    let p = &report.primal;
    let n = a.cols();
    let dim = p.coloring.first().map_or(0, Vec::len);
    let flat: Vec<f64> = p.coloring.concat();
    let (primal_recomputed, primal_feasible) = match VectorColoring::new(dim, n, flat) {
        Ok(u) => {
            let rows = sdp::row_values(a, &u)?;
            let value = rows.into_iter().fold(f64::NEG_INFINITY, f64::max);
            (value == p.value, sdp::feasibility_residual(&u) <= 2e-9)
        }
        Err(_) => (false, false),
    };
    let dual_verified = dual::verify_certificate(a, &report.dual.certificate, CERT_PSD_TOL)?
        && report.dual.certificate.d == report.dual.d;
    let signs_match = |c: &ColoringReport| brute::disc_value(a, &c.signs).is_ok_and(|v| v == c.value);
    let brute_recomputed = report.brute.as_ref().is_none_or(signs_match);
    let rounded_recomputed = report.rounded.as_ref().is_none_or(|r| {
        signs_match(&ColoringReport {
            value: r.value,
            signs: r.signs.clone(),
        })
    });
    Ok(Checks {
        primal_recomputed,
        primal_feasible,
        dual_verified,
        brute_recomputed,
        rounded_recomputed,
        gap_nonnegative: report.gap >= GAP_FLOOR && report.gap == p.value.sqrt() - report.dual.d,
    })
}

/// Aligned two-column summary for terminals.
pub fn format_table(report: &SolveReport) -> String {
    let mut rows: Vec<(String, String)> = vec![
        ("instance".into(), format!("{}x{} ({})", report.instance.rows, report.instance.cols, report.instance.source)),
        ("max column norm".into(), format!("{:.12}", report.instance.max_column_norm)),
        ("primal value".into(), format!("{:.12}", report.primal.value)),
        ("vecdisc upper".into(), format!("{:.12}", report.primal.sqrt_value)),
        ("converged".into(), report.primal.converged.to_string()),
        ("vecdisc lower (D)".into(), format!("{:.12}", report.dual.d)),
        ("sum w".into(), format!("{:.12}", report.dual.weight_sum)),
        ("gap".into(), format!("{:.3e}", report.gap)),
    ];
    if let Some(b) = &report.brute {
        rows.push(("disc (exact)".into(), format!("{:.12}", b.value)));
    }
    if let Some(r) = &report.rounded {
        rows.push(("disc (rounded)".into(), format!("{:.12}  [{}]", r.value, r.label)));
    }
    if let Some(t) = &report.timings {
        rows.push(("solve ms".into(), format!("{:.1}", t.solve_ms)));
        rows.push(("certificate ms".into(), format!("{:.1}", t.certificate_ms)));
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}
