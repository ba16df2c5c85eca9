//! Combinatorial and vector discrepancy of real matrices.
//!
//! `disc(A)` is the minimum of `‖Ax‖∞` over sign vectors; `vecdisc(A)` relaxes
//! signs to unit vectors. This crate bounds `vecdisc` from above with a
//! factorized SDP solver and from below with checkable dual certificates,
//! and computes `disc` exactly for small `n`.

// `!(x > y)` is used on purpose to reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brute;
pub mod cli;
pub mod dual;
pub mod error;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod majorization;
pub mod report;
pub mod rng;
pub mod rounding;
pub mod sdp;

pub use brute::{disc_brute, SignColoring};
pub use dual::{extract_witness, search_certificate, theorem_trace, verify_certificate, DualCertificate};
pub use error::{Error, Result};
pub use linalg::{Matrix, SymMatrix};
pub use sdp::{solve_vecdisc, PrimalSolution, SolverConfig, VectorColoring};
