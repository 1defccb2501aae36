use nalgebra::DMatrix;

use super::DEFAULT_RANK_TOL;
use crate::error::{Error, Result};
use crate::linalg::{full_svd, rank_from_sigma};

/// Canonical left inverse of a full-column-rank matrix (the pseudoinverse).
pub fn left_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    left_inverse_tol(m, DEFAULT_RANK_TOL)
}

pub fn left_inverse_tol(m: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let svd = full_svd(m);
    let rank = rank_from_sigma(&svd.sigma, rank_tol);
    if m.ncols() == 0 || rank < m.ncols() {
        return Err(Error::Rank(format!(
            "{}x{} matrix has column rank {rank}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(pinv_from(&svd, m.nrows(), m.ncols(), rank))
}

/// Canonical right inverse of a full-row-rank matrix (the pseudoinverse).
pub fn right_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    right_inverse_tol(m, DEFAULT_RANK_TOL)
}

pub fn right_inverse_tol(m: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let svd = full_svd(m);
    let rank = rank_from_sigma(&svd.sigma, rank_tol);
    if m.nrows() == 0 || rank < m.nrows() {
        return Err(Error::Rank(format!(
            "{}x{} matrix has row rank {rank}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(pinv_from(&svd, m.nrows(), m.ncols(), rank))
}

fn pinv_from(svd: &crate::linalg::FullSvd, rows: usize, cols: usize, rank: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(cols, rows);
    for i in 0..rank {
        out += (svd.v.column(i) / svd.sigma[i]) * svd.u.column(i).transpose();
    }
    out
}
