//! Snapshot data, basis selection, and generalized inverses.

mod basis;
mod csv_io;
mod inverse;
mod subspace;

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{dim_check, Error, Result};
use crate::linalg::all_finite;

pub use basis::{select_basis, BasisSelection};
pub use csv_io::{format_matrix, load_matrix, parse_matrix, write_matrix};
pub use inverse::{left_inverse, left_inverse_tol, right_inverse, right_inverse_tol};
pub use subspace::{nullspace_basis, subspace_contains, Containment, SubspaceBasis};

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// The snapshot triple `(X, U, X₊)` with `X₊ = AX + BU` for the unknown system.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRecord {
    x: DMatrix<f64>,
    u: DMatrix<f64>,
    xplus: DMatrix<f64>,
}

impl SnapshotRecord {
    /// State snapshots, `n × N`.
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Input snapshots, `m × N`.
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Successor snapshots, `n × N`.
    pub fn xplus(&self) -> &DMatrix<f64> {
        &self.xplus
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.u.nrows()
    }

    pub fn samples(&self) -> usize {
        self.x.ncols()
    }

    /// Loads `X.csv`, `U.csv` and `Xplus.csv` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let x = load_matrix(dir.join("X.csv"), None)?;
        let u = load_matrix(dir.join("U.csv"), None)?;
        let xplus = load_matrix(dir.join("Xplus.csv"), Some(x.nrows()))?;
        validate_snapshots(x, u, xplus)
    }

    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_matrix(dir.join("X.csv"), &self.x)?;
        write_matrix(dir.join("U.csv"), &self.u)?;
        write_matrix(dir.join("Xplus.csv"), &self.xplus)
    }
}

/// Checks shapes and finiteness and wraps the matrices into a record.
pub fn validate_snapshots(
    x: DMatrix<f64>,
    u: DMatrix<f64>,
    xplus: DMatrix<f64>,
) -> Result<SnapshotRecord> {
    let samples = x.ncols();
    dim_check(samples > 0 && x.nrows() > 0 && u.nrows() > 0, || {
        format!(
            "n, m and N must be positive (got n={}, m={}, N={samples})",
            x.nrows(),
            u.nrows()
        )
    })?;
    dim_check(u.ncols() == samples && xplus.ncols() == samples, || {
        format!(
            "column counts differ: X has {samples}, U has {}, Xplus has {}",
            u.ncols(),
            xplus.ncols()
        )
    })?;
    dim_check(xplus.nrows() == x.nrows(), || {
        format!("X has {} rows but Xplus has {}", x.nrows(), xplus.nrows())
    })?;
    for (name, m) in [("X", &x), ("U", &u), ("Xplus", &xplus)] {
        if !all_finite(m) {
            return Err(Error::Data(format!("{name} contains NaN or Inf")));
        }
    }
    Ok(SnapshotRecord { x, u, xplus })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_bookkeeping() {
        let r = validate_snapshots(DMatrix::zeros(2, 3), DMatrix::zeros(1, 3), DMatrix::zeros(2, 3))
            .unwrap();
        assert_eq!((r.n(), r.m(), r.samples()), (2, 1, 3));
    }

    #[test]
    fn column_mismatch() {
        let e = validate_snapshots(DMatrix::zeros(2, 3), DMatrix::zeros(1, 4), DMatrix::zeros(2, 3));
        assert!(matches!(e, Err(Error::Dimension(_))));
    }

    #[test]
    fn row_mismatch() {
        let e = validate_snapshots(DMatrix::zeros(2, 3), DMatrix::zeros(1, 3), DMatrix::zeros(3, 3));
        assert!(matches!(e, Err(Error::Dimension(_))));
    }

    #[test]
    fn nan_in_successor() {
        let mut xp = DMatrix::zeros(2, 3);
        xp[(1, 2)] = f64::NAN;
        let e = validate_snapshots(DMatrix::zeros(2, 3), DMatrix::zeros(1, 3), xp);
        assert!(matches!(e, Err(Error::Data(_))));
    }

    #[test]
    fn empty_record_rejected() {
        let e = validate_snapshots(DMatrix::zeros(2, 0), DMatrix::zeros(1, 0), DMatrix::zeros(2, 0));
        assert!(matches!(e, Err(Error::Dimension(_))));
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = validate_snapshots(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -2.0, 0.25]),
            DMatrix::from_row_slice(1, 2, &[3.0, 4.0]),
            DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]),
        )
        .unwrap();
        r.write_dir(dir.path()).unwrap();
        assert_eq!(SnapshotRecord::load_dir(dir.path()).unwrap(), r);
    }
}
