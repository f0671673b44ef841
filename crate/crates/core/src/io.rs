//! Matrix files: `{"n": int, "partition": [int...], "entries": [[[re, im], ...], ...]}`,
//! row-major, reals written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::algebra::{Operator, TracedAlgebra};
use crate::error::{Error, Result};

/// Locale-independent real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        // Keeps the sign of -0.0 so round trips are bit-identical.
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

pub fn to_json(a: &Operator) -> String {
    let n = a.n();
    let mut out = String::new();
    let partition: Vec<String> = a.algebra().partition().iter().map(|b| b.to_string()).collect();
    let _ = write!(out, "{{\n  \"n\": {n},\n  \"partition\": [{}],\n  \"entries\": [", partition.join(", "));
    for i in 0..n {
        out.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
        for j in 0..n {
            let z = a.get(i, j);
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "[{}, {}]", format_real(z.re), format_real(z.im));
        }
        out.push(']');
    }
    out.push_str("\n  ]\n}\n");
    out
}

#[derive(Deserialize)]
struct MatrixDoc {
    n: usize,
    partition: Vec<usize>,
    entries: Vec<Vec<[f64; 2]>>,
}

/// Parses a matrix document. `partition` replaces the stored partition when given.
pub fn from_json(text: &str, partition: Option<Vec<usize>>) -> Result<Operator> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.entries.len() != doc.n || doc.entries.iter().any(|row| row.len() != doc.n) {
        return Err(Error::Parse(format!(
            "entries must be an {n}x{n} array of [re, im] pairs",
            n = doc.n
        )));
    }
    let algebra = Arc::new(TracedAlgebra::with_dimension(
        doc.n,
        partition.unwrap_or(doc.partition),
    )?);
    let m = DMatrix::from_fn(doc.n, doc.n, |i, j| {
        let [re, im] = doc.entries[i][j];
        Complex64::new(re, im)
    });
    Operator::from_matrix(algebra, m)
}

pub fn write_matrix(path: &Path, a: &Operator) -> Result<()> {
    std::fs::write(path, to_json(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path, partition: Option<Vec<usize>>) -> Result<Operator> {
    from_json(&std::fs::read_to_string(path)?, partition)
}
