//! Report envelope and deterministic JSON output.

use std::path::Path;

use datared_core::Tolerances;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const TOOL: &str = "datared";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope shared by every report; `body` is flattened into it.
#[derive(Debug, Serialize)]
pub struct Report<'a, C: Serialize, B: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    pub seed: Option<u64>,
    pub tolerances: &'a Tolerances,
    #[serde(flatten)]
    pub body: B,
}

impl<'a, C: Serialize, B: Serialize> Report<'a, C, B> {
    pub fn new(command: &'static str, config: &'a C, seed: Option<u64>, tolerances: &'a Tolerances, body: B) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            seed,
            tolerances,
            body,
        }
    }

    /// Pretty JSON with a trailing newline; identical inputs give identical bytes.
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Input(format!("report serialization failed: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Write {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    datared_core::matrix_serde::to_rows(m)
}

pub fn vectors(vs: &[DVector<f64>]) -> Vec<Vec<f64>> {
    vs.iter().map(|v| v.iter().copied().collect()).collect()
}

/// Reads a vector stored as one CSV row or one CSV column.
pub fn load_vector(path: &Path, len: usize) -> Result<DVector<f64>> {
    let m = datared_core::data_model::load_matrix(path, None)?;
    let v = match m.shape() {
        (_, 1) => m.column(0).into_owned(),
        (1, _) => DVector::from_iterator(m.ncols(), m.row(0).iter().copied()),
        (r, c) => {
            return Err(CliError::Input(format!(
                "{} holds a {r}x{c} matrix, expected a vector",
                path.display()
            )))
        }
    };
    if v.len() != len {
        return Err(datared_core::Error::Dimension(format!(
            "{} has length {}, expected {len}",
            path.display(),
            v.len()
        ))
        .into());
    }
    Ok(v)
}
