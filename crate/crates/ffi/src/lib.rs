//! C ABI for disclab.
//!
//! Matrices and certificates cross the boundary as opaque handles created
//! and freed here. Every call returns a [`DisclabStatus`]; on failure a
//! message is kept per thread and read back with
//! [`disclab_last_error_message`]. Panics are caught and reported as
//! `DISCLAB_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use disclab::dual::{self, DualCertificate};
use disclab::linalg::Matrix;
use disclab::sdp::SolverConfig;
use disclab::{brute, instances, io, sdp, Error};

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisclabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Numerical = 5,
    TooLarge = 6,
    /// The input was checked and found mathematically wrong (for example a
    /// certificate that fails verification).
    Refuted = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// A dense real matrix.
pub struct DisclabMatrix(Matrix);

/// A dual certificate `(p, w, D)`.
pub struct DisclabCertificate(DualCertificate);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> DisclabStatus {
    match err {
        Error::Io(_) => DisclabStatus::Io,
        Error::MalformedHeader { .. }
        | Error::MalformedEntry { .. }
        | Error::NonFiniteEntry { .. }
        | Error::EntryCount { .. }
        | Error::Json(_)
        | Error::Certificate(_) => DisclabStatus::Parse,
        Error::NumericalFailure { .. } | Error::MarginNotFound { .. } | Error::NotPsd { .. } => {
            DisclabStatus::Numerical
        }
        Error::TooLarge { .. } => DisclabStatus::TooLarge,
        Error::Dimension(_) | Error::NonFinite(_) | Error::NotSymmetric { .. } | Error::Precondition(_) => {
            DisclabStatus::InvalidArgument
        }
    }
}

struct Fail(DisclabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DisclabStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DisclabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DisclabStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DisclabStatus::Internal
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(DisclabStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T) {
    if !out.is_null() {
        out.write(value);
    }
}

unsafe fn fill(buf: *mut f64, len: usize, src: &[f64], what: &str) -> Result<(), Fail> {
    if buf.is_null() {
        return Ok(());
    }
    if len < src.len() {
        return Err(Fail(
            DisclabStatus::BufferTooSmall,
            format!("{what} needs {} entries, buffer has {len}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn disclab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread (empty after success).
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn disclab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a `rows × cols` matrix from row-major `data`.
///
/// # Safety
/// `data` must point to `rows * cols` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn disclab_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut DisclabMatrix,
) -> DisclabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(DisclabStatus::InvalidArgument, "rows * cols overflows".into()))?;
        let values = slice_arg(data, len, "data")?.to_vec();
        let m = Matrix::new(rows, cols, values)?;
        out.write(Box::into_raw(Box::new(DisclabMatrix(m))));
        Ok(())
    })
}

/// Reads a matrix file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn disclab_matrix_read(path: *const c_char, out: *mut *mut DisclabMatrix) -> DisclabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = io::read_matrix(path_arg(path)?)?;
        out.write(Box::into_raw(Box::new(DisclabMatrix(m))));
        Ok(())
    })
}

/// Writes a matrix file atomically.
///
/// # Safety
/// `matrix` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn disclab_matrix_write(matrix: *const DisclabMatrix, path: *const c_char) -> DisclabStatus {
    guard(|| {
        let m = as_ref(matrix, "matrix")?;
        io::write_matrix(&m.0, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn disclab_matrix_free(matrix: *mut DisclabMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Row count, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn disclab_matrix_rows(matrix: *const DisclabMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.rows())
}

/// Column count, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn disclab_matrix_cols(matrix: *const DisclabMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.cols())
}

/// Copies the entries in row-major order into `buf` (`len ≥ rows·cols`).
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn disclab_matrix_data(matrix: *const DisclabMatrix, buf: *mut f64, len: usize) -> DisclabStatus {
    guard(|| {
        let m = as_ref(matrix, "matrix")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        fill(buf, len, m.0.data(), "matrix data")
    })
}

/// Gaussian matrix with unit-norm columns.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn disclab_gen_gaussian_unit(
    rows: usize,
    cols: usize,
    seed: u64,
    out: *mut *mut DisclabMatrix,
) -> DisclabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if rows == 0 || cols == 0 {
            return Err(Fail(DisclabStatus::InvalidArgument, "rows and cols must be positive".into()));
        }
        let m = instances::gen_gaussian_unit(rows, cols, seed);
        out.write(Box::into_raw(Box::new(DisclabMatrix(m))));
        Ok(())
    })
}

/// Upper bound on `vecdisc(A)²`. `value` receives the maximum row value of
/// the returned coloring. When `coloring` is non-null it receives the
/// `n × n` coloring column by column (`coloring_len ≥ n²`).
///
/// # Safety
/// Pointers must be null or valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn disclab_solve_vecdisc(
    matrix: *const DisclabMatrix,
    trials: usize,
    max_iters: usize,
    seed: u64,
    value: *mut f64,
    coloring: *mut f64,
    coloring_len: usize,
) -> DisclabStatus {
    guard(|| {
        let a = &as_ref(matrix, "matrix")?.0;
        let cfg = SolverConfig {
            trials,
            max_iters,
            ..SolverConfig::with_seed(seed)
        };
        let sol = sdp::solve_vecdisc(a, &cfg)?;
        fill(coloring, coloring_len, sol.coloring.data(), "coloring")?;
        write_out(value, sol.value);
        Ok(())
    })
}

/// Exact `disc(A)` for `n ≤ limit`. `signs` (length `n`) receives an
/// optimal coloring when non-null.
///
/// # Safety
/// `signs` must be null or hold `cols` bytes.
#[no_mangle]
pub unsafe extern "C" fn disclab_disc_brute(
    matrix: *const DisclabMatrix,
    limit: usize,
    value: *mut f64,
    signs: *mut i8,
) -> DisclabStatus {
    guard(|| {
        let a = &as_ref(matrix, "matrix")?.0;
        let c = brute::disc_brute(a, limit)?;
        if !signs.is_null() {
            ptr::copy_nonoverlapping(c.signs().as_ptr(), signs, c.signs().len());
        }
        write_out(value, c.value());
        Ok(())
    })
}

/// Builds a certificate from its parts. `p` must be a distribution.
///
/// # Safety
/// `p` holds `p_len` doubles, `w` holds `w_len`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_new(
    p: *const f64,
    p_len: usize,
    w: *const f64,
    w_len: usize,
    d: f64,
    out: *mut *mut DisclabCertificate,
) -> DisclabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cert = DualCertificate::new(
            slice_arg(p, p_len, "p")?.to_vec(),
            slice_arg(w, w_len, "w")?.to_vec(),
            d,
            io::CERT_P_TOL,
        )?;
        out.write(Box::into_raw(Box::new(DisclabCertificate(cert))));
        Ok(())
    })
}

/// Heuristic certificate search; the result always verifies.
///
/// # Safety
/// `matrix` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_search(
    matrix: *const DisclabMatrix,
    iters: usize,
    seed: u64,
    out: *mut *mut DisclabCertificate,
) -> DisclabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = &as_ref(matrix, "matrix")?.0;
        let cert = dual::search_certificate(a, iters, seed)?;
        out.write(Box::into_raw(Box::new(DisclabCertificate(cert))));
        Ok(())
    })
}

/// Returns `DISCLAB_STATUS_OK` if the certificate is valid at `tol` and
/// `DISCLAB_STATUS_REFUTED` if it is not. `min_eigenvalue` receives
/// `λ_min(AᵀPA − W)` when non-null.
///
/// # Safety
/// Handles must be live.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_verify(
    matrix: *const DisclabMatrix,
    cert: *const DisclabCertificate,
    tol: f64,
    min_eigenvalue: *mut f64,
) -> DisclabStatus {
    guard(|| {
        let a = &as_ref(matrix, "matrix")?.0;
        let c = &as_ref(cert, "certificate")?.0;
        let v = dual::verify_certificate_detailed(a, c, tol)?;
        write_out(min_eigenvalue, v.min_eigenvalue);
        if v.valid {
            Ok(())
        } else {
            Err(Fail(
                DisclabStatus::Refuted,
                format!(
                    "certificate invalid: min eigenvalue {:e}, weight sum {} vs D² {}",
                    v.min_eigenvalue,
                    v.weight_sum,
                    c.d * c.d
                ),
            ))
        }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_read(path: *const c_char, out: *mut *mut DisclabCertificate) -> DisclabStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = io::read_certificate(path_arg(path)?)?;
        out.write(Box::into_raw(Box::new(DisclabCertificate(c))));
        Ok(())
    })
}

/// # Safety
/// `cert` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_write(cert: *const DisclabCertificate, path: *const c_char) -> DisclabStatus {
    guard(|| {
        let c = as_ref(cert, "certificate")?;
        io::write_certificate(&c.0, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `cert` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_free(cert: *mut DisclabCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// The claimed bound `D`, or NaN for a null handle.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_bound(cert: *const DisclabCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.0.d)
}

/// `Σw`, or NaN for a null handle.
///
/// # Safety
/// `cert` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn disclab_cert_weight_sum(cert: *const DisclabCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.0.weight_sum())
}

/// For a certificate with `Σw > 1` on a matrix with columns of norm at most
/// one, writes `z` (length `cols`) with `E_p[(Az)_i²] < Σ w_j z_j²` and both
/// sides of that inequality.
///
/// # Safety
/// `z` must hold `z_len` doubles; `lhs` and `rhs` may be null.
#[no_mangle]
pub unsafe extern "C" fn disclab_extract_witness(
    matrix: *const DisclabMatrix,
    cert: *const DisclabCertificate,
    z: *mut f64,
    z_len: usize,
    lhs: *mut f64,
    rhs: *mut f64,
) -> DisclabStatus {
    guard(|| {
        let a = &as_ref(matrix, "matrix")?.0;
        let c = &as_ref(cert, "certificate")?.0;
        let wit = dual::extract_witness(a, &c.p, &c.w)?;
        fill(z, z_len, &wit.z, "z")?;
        write_out(lhs, wit.lhs);
        write_out(rhs, wit.rhs);
        Ok(())
    })
}
