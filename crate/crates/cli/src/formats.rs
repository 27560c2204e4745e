//! On-disk formats.
//!
//! Burst CSV: optional first line `# pulses=<n>`, then one line per range
//! cell holding `re(z_0),im(z_0),…,re(z_{n−1}),im(z_{n−1})`. Values are
//! written in shortest round-trip form, so write-then-read is bit-exact.
//!
//! Points: JSON lines, one `{"log_p0", "mu", "n_pulses"}` object per cell.
//!
//! Labels: a JSON array of cluster indices, or any JSON object with a
//! `labels` array (such as a cluster model).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use infogeo::poincare::ProductPoint;
use infogeo::simulate::Burst;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

/// Writes through a temporary file in the target directory, renamed into
/// place once complete.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let err = |source| CliError::Write {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn malformed(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::MalformedFile {
        path: path.to_owned(),
        line,
        column,
        message: message.into(),
    }
}

pub fn format_burst(burst: &Burst) -> String {
    let mut out = format!("# pulses={}\n", burst.n_pulses());
    for cell in burst.cells() {
        for (i, z) in cell.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{},{}", z.re, z.im).expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn parse_burst(text: &str, path: &Path) -> Result<Burst> {
    let mut lines = text.lines().enumerate().peekable();
    let mut n_pulses = None;
    if let Some((_, first)) = lines.peek() {
        if let Some(rest) = first.trim().strip_prefix('#') {
            let value = rest
                .trim()
                .strip_prefix("pulses=")
                .ok_or_else(|| malformed(path, 1, 1, "header must read \"# pulses=<n>\""))?;
            let n: usize = value
                .trim()
                .parse()
                .map_err(|_| malformed(path, 1, 1, format!("invalid pulse count {value:?}")))?;
            if n == 0 {
                return Err(malformed(path, 1, 1, "pulse count must be positive"));
            }
            n_pulses = Some(n);
            lines.next();
        }
    }
    let mut cells: Vec<Vec<Complex64>> = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = match n_pulses {
            Some(n) => 2 * n,
            None if fields.len().is_multiple_of(2) => {
                n_pulses = Some(fields.len() / 2);
                fields.len()
            }
            None => {
                return Err(malformed(
                    path,
                    line_no,
                    fields.len(),
                    format!("odd field count {} (need re,im pairs)", fields.len()),
                ))
            }
        };
        if fields.len() != expected {
            return Err(malformed(
                path,
                line_no,
                fields.len().min(expected) + 1,
                format!("row has {} fields, expected {expected}", fields.len()),
            ));
        }
        let mut values = Vec::with_capacity(expected);
        for (col, f) in fields.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| malformed(path, line_no, col + 1, format!("not a number: {:?}", f.trim())))?;
            if !v.is_finite() {
                return Err(CliError::NonFiniteValue {
                    path: path.to_owned(),
                    line: line_no,
                    column: col + 1,
                });
            }
            values.push(v);
        }
        cells.push(values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let n = n_pulses.ok_or_else(|| malformed(path, 1, 1, "empty burst file"))?;
    Burst::from_cells(n, cells).map_err(|e| malformed(path, 1, 1, e.to_string()))
}

pub fn read_burst(path: &Path) -> Result<Burst> {
    parse_burst(&read_text(path)?, path)
}

pub fn write_burst(burst: &Burst, path: &Path) -> Result<()> {
    write_atomic(path, format_burst(burst).as_bytes())
}

pub fn format_points(points: &[ProductPoint]) -> String {
    let mut out = String::new();
    for p in points {
        out.push_str(&serde_json::to_string(p).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn parse_points(text: &str, path: &Path) -> Result<Vec<ProductPoint>> {
    let mut points = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: ProductPoint =
            serde_json::from_str(line).map_err(|e| malformed(path, index + 1, e.column(), e.to_string()))?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(malformed(path, 1, 1, "no points"));
    }
    Ok(points)
}

pub fn read_points(path: &Path) -> Result<Vec<ProductPoint>> {
    parse_points(&read_text(path)?, path)
}

pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<usize>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| malformed(path, e.line(), e.column(), e.to_string()))?;
    let array = match &value {
        serde_json::Value::Object(map) => map.get("labels"),
        other => Some(other),
    };
    array
        .and_then(|a| serde_json::from_value::<Vec<usize>>(a.clone()).ok())
        .ok_or_else(|| malformed(path, 1, 1, "expected an array of labels or an object with a \"labels\" array"))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    parse_labels(&read_text(path)?, path)
}
