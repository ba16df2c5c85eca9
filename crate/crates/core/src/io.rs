//! File formats.
//!
//! Matrices are plain text: a header line `m n`, then `m·n` whitespace
//! separated entries in row-major order. Line breaks after the header are
//! not significant. Written values use 17 significant digits so a
//! write/read cycle is bit-exact.
//!
//! Certificates are JSON objects `{"p": [...], "w": [...], "D": x}`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dual::DualCertificate;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `p` must sum to one within this when read from a file.
pub const CERT_P_TOL: f64 = 1e-9;

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(k, line)| line.split_whitespace().map(move |t| (k + 1, t)));

    let mut header = |what: &str| -> Result<usize> {
        let (line, tok) = tokens.next().ok_or_else(|| Error::MalformedHeader {
            line: 1,
            msg: format!("missing {what}"),
        })?;
        match tok.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(Error::MalformedHeader {
                line,
                msg: format!("{what} must be a positive integer, got {tok:?}"),
            }),
        }
    };
    let rows = header("row count")?;
    let cols = header("column count")?;
    let expected = rows * cols;

    let mut data = Vec::with_capacity(expected);
    let mut last_line = 1;
    for (line, tok) in tokens {
        last_line = line;
        if data.len() == expected {
            return Err(Error::EntryCount {
                line,
                expected,
                found: expected + 1,
            });
        }
        let v: f64 = tok.parse().map_err(|_| Error::MalformedEntry {
            line,
            token: tok.to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFiniteEntry {
                line,
                token: tok.to_string(),
            });
        }
        data.push(v);
    }
    if data.len() != expected {
        return Err(Error::EntryCount {
            line: last_line,
            expected,
            found: data.len(),
        });
    }
    Matrix::new(rows, cols, data)
}

pub fn format_matrix(a: &Matrix) -> String {
    let mut s = format!("{} {}\n", a.rows(), a.cols());
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|v| format_f64(*v)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// 17 significant digits; integers are printed plainly.
pub fn format_f64(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.16e}")
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix(a: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, format_matrix(a).as_bytes())
}

pub fn parse_certificate(text: &str) -> Result<DualCertificate> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Certificate("expected a JSON object".into()))?;
    for key in ["p", "w", "D"] {
        if !obj.contains_key(key) {
            return Err(Error::Certificate(format!("missing key {key:?}")));
        }
    }
    let raw: DualCertificate = serde_json::from_value(value)?;
    DualCertificate::new(raw.p, raw.w, raw.d, CERT_P_TOL)
}

pub fn format_certificate(cert: &DualCertificate) -> Result<String> {
    Ok(serde_json::to_string_pretty(cert)? + "\n")
}

pub fn read_certificate(path: impl AsRef<Path>) -> Result<DualCertificate> {
    parse_certificate(&fs::read_to_string(path)?)
}

pub fn write_certificate(cert: &DualCertificate, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, format_certificate(cert)?.as_bytes())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other(format!("{} has no file name", path.display()))))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
