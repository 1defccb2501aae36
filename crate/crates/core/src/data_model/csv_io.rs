//! Plain CSV matrices: one row per line, comma-separated decimals, no header.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Reads a matrix from a CSV file, optionally checking its row count.
pub fn load_matrix(path: impl AsRef<Path>, expected_rows: Option<usize>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let m = parse_matrix(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    if let Some(rows) = expected_rows {
        if m.nrows() != rows {
            return Err(Error::Dimension(format!(
                "{}: expected {rows} rows, found {}",
                path.display(),
                m.nrows()
            )));
        }
    }
    Ok(m)
}

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if rows == 0 {
            cols = record.len();
        }
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "line {}, field {}: not a decimal literal: {field:?}",
                    rows + 1,
                    j + 1
                ))
            })?;
            values.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse("no rows".into()));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// Formats a matrix with shortest round-trip decimal literals.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
