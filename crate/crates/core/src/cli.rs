//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 a mathematical refutation
//! (a certificate that does not verify, a witness against a certificate the
//! verifier accepted, a failed containment in `trace`).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::brute;
use crate::dual::{self, CERT_PSD_TOL};
use crate::error::{Error, Result};
use crate::instances;
use crate::io;
use crate::report::{self, PrimalReport, ReportOptions};
use crate::rounding;
use crate::sdp::{self, SolverConfig, VectorColoring};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REFUTED: i32 = 2;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DISCLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "disclab", version, about = "Combinatorial and vector discrepancy toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance matrix.
    Gen(GenArgs),
    /// Upper-bound vecdisc(A) with the factorized SDP solver.
    Solve(SolveArgs),
    /// Exact disc(A) by exhaustive enumeration.
    Brute(BruteArgs),
    /// Search for a dual certificate (a lower bound on vecdisc(A)).
    CertSearch(CertSearchArgs),
    /// Verify a dual certificate.
    CertVerify(CertVerifyArgs),
    /// Find z refuting an overweight (Σw > 1) certificate.
    Witness(CertInput),
    /// Evaluate the determinant/majorization chain for a certificate.
    Trace(CertInput),
    /// Round a vector coloring with random hyperplanes.
    Round(RoundArgs),
    /// Solve, search a certificate, enumerate and round; emit a report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Family {
    /// Gaussian entries, unit-norm columns.
    Gaussian {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    /// Bounded-degree hypergraph incidence matrix.
    BeckFiala {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        degree: usize,
        /// Divide entries by √degree.
        #[arg(long)]
        scaled: bool,
    },
    /// Arithmetic progressions in [N] with difference ≤ √N.
    Ap {
        #[arg(long)]
        size: usize,
        /// Scale columns to unit norm.
        #[arg(long)]
        scaled: bool,
    },
    /// The 1×1 matrix (1).
    Tight,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 5000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the solution summary here (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the vector coloring (a dim × n matrix) here.
    #[arg(long)]
    coloring: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BruteArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = brute::DEFAULT_LIMIT)]
    limit: usize,
}

#[derive(Debug, Args)]
struct CertSearchArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CertVerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    cert: PathBuf,
    #[arg(long, default_value_t = CERT_PSD_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct CertInput {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Debug, Args)]
struct RoundArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Vector coloring written by `solve --coloring`; solved on the fly when absent.
    #[arg(long)]
    coloring: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 5000)]
    iters: usize,
    #[arg(long = "cert-iters", default_value_t = 50)]
    cert_iters: usize,
    /// Enumerate exactly when n is at most this; 0 disables.
    #[arg(long, default_value_t = 20)]
    limit: usize,
    #[arg(long = "round-trials", default_value_t = 100)]
    round_trials: usize,
    /// Omit wall-clock timings (for reproducible output).
    #[arg(long = "no-timings")]
    no_timings: bool,
    /// Print an aligned table instead of JSON.
    #[arg(long)]
    table: bool,
    /// Output path; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct SolveSummary {
    seed: u64,
    trial: usize,
    #[serde(flatten)]
    primal: PrimalReport,
    row_values: Vec<f64>,
}

/// Sizes the global worker pool from `DISCLAB_THREADS`, once per process.
pub fn init_threads() {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    if let Some(n) = threads {
        // Fails only if a pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    init_threads();
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen(args) => {
            let a = match args.family {
                Family::Gaussian { rows, cols } => {
                    if rows == 0 || cols == 0 {
                        return Err(Error::Precondition("rows and cols must be positive".into()));
                    }
                    instances::gen_gaussian_unit(rows, cols, args.seed)
                }
                Family::BeckFiala {
                    vertices,
                    edges,
                    degree,
                    scaled,
                } => instances::gen_beck_fiala(vertices, edges, degree, args.seed, scaled)?,
                Family::Ap { size, scaled } => instances::gen_arithmetic_progressions(size, scaled)?,
                Family::Tight => instances::gen_tight(),
            };
            emit(out, args.out.as_ref(), &io::format_matrix(&a))?;
            Ok(EXIT_OK)
        }
        Command::Solve(args) => {
            let a = io::read_matrix(&args.input)?;
            let cfg = SolverConfig {
                trials: args.trials,
                max_iters: args.iters,
                ..SolverConfig::with_seed(args.seed)
            };
            let sol = sdp::solve_vecdisc(&a, &cfg)?;
            if let Some(path) = &args.coloring {
                io::write_matrix(&sol.coloring.to_matrix(), path)?;
            }
            let summary = SolveSummary {
                seed: sol.seed,
                trial: sol.trial,
                primal: PrimalReport::from_solution(&sol, args.trials),
                row_values: sol.row_values.clone(),
            };
            emit(out, args.report.as_ref(), &io::to_json(&summary)?)?;
            Ok(EXIT_OK)
        }
        Command::Brute(args) => {
            let a = io::read_matrix(&args.input)?;
            let c = brute::disc_brute(&a, args.limit)?;
            emit(out, None, &io::to_json(&c)?)?;
            Ok(EXIT_OK)
        }
        Command::CertSearch(args) => {
            let a = io::read_matrix(&args.input)?;
            let cert = dual::search_certificate(&a, args.iters, args.seed)?;
            emit(out, args.out.as_ref(), &io::format_certificate(&cert)?)?;
            Ok(EXIT_OK)
        }
        Command::CertVerify(args) => {
            let a = io::read_matrix(&args.input)?;
            let cert = io::read_certificate(&args.cert)?;
            let v = dual::verify_certificate_detailed(&a, &cert, args.tol)?;
            if v.valid {
                writeln!(out, "valid, D = {}", cert.d)?;
                Ok(EXIT_OK)
            } else {
                writeln!(
                    out,
                    "invalid: min eigenvalue of AᵀPA − W = {:e}, Σw = {}, D² = {}",
                    v.min_eigenvalue,
                    v.weight_sum,
                    cert.d * cert.d
                )?;
                Ok(EXIT_REFUTED)
            }
        }
        Command::Witness(args) => {
            let a = io::read_matrix(&args.input)?;
            let cert = io::read_certificate(&args.cert)?;
            if cert.weight_sum() <= 1.0 {
                writeln!(err, "Σw = {} ≤ 1: nothing to refute", cert.weight_sum())?;
                return Ok(EXIT_ERROR);
            }
            let wit = dual::extract_witness(&a, &cert.p, &cert.w)?;
            emit(out, None, &io::to_json(&wit)?)?;
            writeln!(err, "lhs {} < rhs {}", wit.lhs, wit.rhs)?;
            if dual::verify_certificate(&a, &cert, CERT_PSD_TOL)? {
                writeln!(err, "the verifier accepted this certificate, yet a witness refutes it")?;
                return Ok(EXIT_REFUTED);
            }
            Ok(EXIT_OK)
        }
        Command::Trace(args) => {
            let a = io::read_matrix(&args.input)?;
            let cert = io::read_certificate(&args.cert)?;
            match dual::theorem_trace(&a, &cert.p, &cert.w) {
                Ok(t) => {
                    emit(out, None, &io::to_json(&t)?)?;
                    Ok(if t.all_flags() { EXIT_OK } else { EXIT_REFUTED })
                }
                Err(Error::Precondition(msg)) => {
                    writeln!(err, "{msg}")?;
                    Ok(EXIT_REFUTED)
                }
                Err(e) => Err(e),
            }
        }
        Command::Round(args) => {
            let a = io::read_matrix(&args.input)?;
            let u = match &args.coloring {
                Some(p) => VectorColoring::from_matrix(&io::read_matrix(p)?)?,
                None => sdp::solve_vecdisc(&a, &SolverConfig::with_seed(args.seed))?.coloring,
            };
            let c = rounding::round_hyperplane(&a, &u, args.trials, args.seed)?;
            emit(out, None, &io::to_json(&c)?)?;
            Ok(EXIT_OK)
        }
        Command::Report(args) => {
            let a = io::read_matrix(&args.input)?;
            let opts = ReportOptions {
                seed: args.seed,
                trials: args.trials,
                max_iters: args.iters,
                cert_iters: args.cert_iters,
                brute_limit: (args.limit > 0).then_some(args.limit),
                round_trials: args.round_trials,
                timings: !args.no_timings,
            };
            let r = report::build_report(&a, &args.input.display().to_string(), &opts)?;
            let text = if args.table {
                report::format_table(&r)
            } else {
                io::to_json(&r)?
            };
            emit(out, args.report.as_ref(), &text)?;
            Ok(EXIT_OK)
        }
    }
}

