use nalgebra::DMatrix;

use crate::error::{dim_check, Error, Result};
use crate::linalg::{all_finite, kernel_below, largest_singular_value, orthonormal_range};

/// A subspace of `ℝᵈ` held as an orthonormal basis (possibly empty).
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    basis: DMatrix<f64>,
    tol: f64,
}

impl SubspaceBasis {
    /// Orthonormalizes the columns of `spanning`, dropping directions below
    /// `tol · σ_max`.
    pub fn span(spanning: &DMatrix<f64>, tol: f64) -> Self {
        Self {
            basis: orthonormal_range(spanning, tol),
            tol,
        }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            basis: DMatrix::zeros(ambient_dim, 0),
            tol: 0.0,
        }
    }

    pub(crate) fn from_orthonormal(basis: DMatrix<f64>, tol: f64) -> Self {
        Self { basis, tol }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    /// Orthogonal projector onto the span.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `(I − Π)·vectors`.
    pub fn defect(&self, vectors: &DMatrix<f64>) -> DMatrix<f64> {
        vectors - &self.basis * (self.basis.transpose() * vectors)
    }
}

/// Outcome of a subspace membership test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Containment {
    pub contained: bool,
    /// `‖(I − Π)·vectors‖_F`.
    pub residual: f64,
}

/// Tests `span(vectors) ⊆ span(basis)` up to `tol · max(1, ‖vectors‖_F)`.
pub fn subspace_contains(
    basis: &SubspaceBasis,
    vectors: &DMatrix<f64>,
    tol: f64,
) -> Result<Containment> {
    dim_check(vectors.nrows() == basis.ambient_dim(), || {
        format!(
            "vectors have {} rows, basis lives in dimension {}",
            vectors.nrows(),
            basis.ambient_dim()
        )
    })?;
    let residual = basis.defect(vectors).norm();
    Ok(Containment {
        contained: residual <= tol * vectors.norm().max(1.0),
        residual,
    })
}

/// Orthonormal basis of `{w : ‖Mw‖ ≤ tol·σ_max(M)·‖w‖}`.
pub fn nullspace_basis(m: &DMatrix<f64>, tol: f64) -> Result<SubspaceBasis> {
    if !all_finite(m) {
        return Err(Error::Data("matrix contains NaN or Inf".into()));
    }
    let threshold = tol * largest_singular_value(m);
    Ok(SubspaceBasis::from_orthonormal(kernel_below(m, threshold), tol))
}
