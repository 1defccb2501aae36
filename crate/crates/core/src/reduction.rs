//! The θ-family of data-expressed reduced models `A_θ = X̄ℓ·X₊·θ` with
//! `X·θ = X̄`, their feedback gains `U·θ = K·X̄`, the controlled-invariance
//! test `im(X₊θ) ⊆ 𝒳`, and projection/lifting between `ℝⁿ` and `ℝˢ`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data_model::{
    nullspace_basis, subspace_contains, BasisSelection, Containment, SnapshotRecord,
    SubspaceBasis,
};
use crate::error::{dim_check, Error, Result};
use crate::linalg::pseudo_inverse;

/// Relative tolerance of the constraint `X·θ = X̄`.
pub const THETA_TOL: f64 = 1e-8;

/// One member of the reduced-model family together with its feedback gain.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedModel {
    pub theta: DMatrix<f64>,
    pub a_theta: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub invariant: bool,
    pub invariance_residual: f64,
    /// `‖U·θ − K·X̄‖_F`.
    pub gain_residual: f64,
}

impl ReducedModel {
    /// Evaluates `A_θ`, the gain (with `R = 0` unless given) and the invariance test.
    pub fn build(
        record: &SnapshotRecord,
        basis: &BasisSelection,
        theta: DMatrix<f64>,
        r: Option<&DMatrix<f64>>,
        inv_tol: f64,
    ) -> Result<Self> {
        let a_theta = reduced_state_matrix_theta(record, basis, &theta)?;
        let k = solve_feedback_gain(record, basis, &theta, r)?;
        let gain_residual = (record.u() * &theta - &k * basis.xbar()).norm();
        let inv = check_invariance(record, basis, &theta, inv_tol)?;
        Ok(Self {
            theta,
            a_theta,
            k,
            invariant: inv.contained,
            invariance_residual: inv.residual,
            gain_residual,
        })
    }
}

fn check_pair(record: &SnapshotRecord, basis: &BasisSelection) -> Result<()> {
    dim_check(
        basis.selector().nrows() == record.samples() && basis.xbar().nrows() == record.n(),
        || {
            format!(
                "basis built for n={}, N={} but record has n={}, N={}",
                basis.xbar().nrows(),
                basis.selector().nrows(),
                record.n(),
                record.samples()
            )
        },
    )
}

fn check_theta(record: &SnapshotRecord, basis: &BasisSelection, theta: &DMatrix<f64>) -> Result<()> {
    check_pair(record, basis)?;
    dim_check(theta.shape() == (record.samples(), basis.order()), || {
        format!(
            "theta is {}x{}, expected {}x{}",
            theta.nrows(),
            theta.ncols(),
            record.samples(),
            basis.order()
        )
    })?;
    let defect = (record.x() * theta - basis.xbar()).norm();
    if defect > THETA_TOL * basis.xbar().norm() {
        return Err(Error::Parameter(format!(
            "X·theta differs from X̄ by {defect:.3e}"
        )));
    }
    Ok(())
}

/// `Ā = X̄ℓ·X₊·E`.
pub fn reduced_state_matrix(record: &SnapshotRecord, basis: &BasisSelection) -> Result<DMatrix<f64>> {
    check_pair(record, basis)?;
    reduced_state_matrix_theta(record, basis, basis.selector())
}

/// `A_θ = X̄ℓ·X₊·θ`; rejects θ with `X·θ ≠ X̄`.
pub fn reduced_state_matrix_theta(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    theta: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_theta(record, basis, theta)?;
    Ok(basis.xbar_left() * (record.xplus() * theta))
}

/// `K = (U·θ)·X̄ℓ + R·(I − X̄·X̄ℓ)`, the solutions of `U·θ = K·X̄`.
pub fn solve_feedback_gain(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    theta: &DMatrix<f64>,
    r: Option<&DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    check_theta(record, basis, theta)?;
    let mut k = (record.u() * theta) * basis.xbar_left();
    if let Some(r) = r {
        dim_check(r.shape() == (record.m(), record.n()), || {
            format!("R must be {}x{}", record.m(), record.n())
        })?;
        let n = record.n();
        k += r * (DMatrix::identity(n, n) - basis.xbar() * basis.xbar_left());
    }
    Ok(k)
}

/// Tests `im(X₊θ) ⊆ 𝒳`; with `θ = E` this is the selector-level condition.
pub fn check_invariance(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    theta: &DMatrix<f64>,
    tol: f64,
) -> Result<Containment> {
    check_pair(record, basis)?;
    dim_check(theta.nrows() == record.samples(), || {
        format!("theta has {} rows, expected {}", theta.nrows(), record.samples())
    })?;
    subspace_contains(&basis.data_subspace(), &(record.xplus() * theta), tol)
}

/// The affine family `θ = E + Ẽ`, `X·Ẽ = 0`, stored as `E` plus an
/// orthonormal basis `N_ker` of `ker X`; members are `E + N_ker·C`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaFamily {
    selector: DMatrix<f64>,
    kernel: SubspaceBasis,
}

impl ThetaFamily {
    pub fn selector(&self) -> &DMatrix<f64> {
        &self.selector
    }

    /// `ker X` inside `ℝᴺ`.
    pub fn kernel(&self) -> &SubspaceBasis {
        &self.kernel
    }

    /// Number of free scalar parameters, `dim(ker X) · s`.
    pub fn dimension(&self) -> usize {
        self.kernel.dim() * self.selector.ncols()
    }

    /// The `i`-th basis element `Ẽᵢ` (N×s), column-block-wise: kernel vector
    /// `i / s` placed in column `i % s`.
    pub fn block(&self, i: usize) -> DMatrix<f64> {
        let s = self.selector.ncols();
        let mut out = DMatrix::zeros(self.selector.nrows(), s);
        out.set_column(i % s, &self.kernel.matrix().column(i / s));
        out
    }

    /// `E + N_ker·C` for a `dim(ker X) × s` coefficient matrix.
    pub fn theta(&self, coeffs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        dim_check(coeffs.shape() == (self.kernel.dim(), self.selector.ncols()), || {
            format!(
                "coefficients must be {}x{}",
                self.kernel.dim(),
                self.selector.ncols()
            )
        })?;
        Ok(&self.selector + self.kernel.matrix() * coeffs)
    }

    /// Draws `C` with i.i.d. standard normal entries times `scale`.
    pub fn sample(&self, seed: u64, scale: f64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = DMatrix::from_fn(self.kernel.dim(), self.selector.ncols(), |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        });
        self.theta(&coeffs).expect("coefficient shape matches by construction")
    }
}

pub fn theta_family(record: &SnapshotRecord, basis: &BasisSelection) -> Result<ThetaFamily> {
    check_pair(record, basis)?;
    Ok(ThetaFamily {
        selector: basis.selector().clone(),
        kernel: nullspace_basis(record.x(), basis.rank_tol())?,
    })
}

/// Least-norm search for a family member passing the invariance test.
///
/// `(I − Π)·X₊·(E + N_ker·C) = 0` is linear in `C`; the minimum-norm
/// least-squares `C` is returned when it satisfies the test at `tol`.
pub fn find_invariant_theta(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    tol: f64,
) -> Result<Option<DMatrix<f64>>> {
    let family = theta_family(record, basis)?;
    let subspace = basis.data_subspace();
    let base_defect = subspace.defect(&(record.xplus() * basis.selector()));
    let theta = if family.kernel().is_empty() {
        basis.selector().clone()
    } else {
        let lever = subspace.defect(&(record.xplus() * family.kernel().matrix()));
        let coeffs = -pseudo_inverse(&lever, basis.rank_tol()) * base_defect;
        family.theta(&coeffs)?
    };
    let check = check_invariance(record, basis, &theta, tol)?;
    Ok(check.contained.then_some(theta))
}

/// Reduced coordinates `x̄(k) = X̄ℓ·x(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub states: Vec<DVector<f64>>,
    /// Largest `‖x(k) − X̄·x̄(k)‖` along the sequence.
    pub max_defect: f64,
    /// Set when some `x(k)` is outside `𝒳` at the given tolerance.
    pub out_of_subspace: bool,
}

pub fn project_trajectory(
    basis: &BasisSelection,
    trajectory: &[DVector<f64>],
    tol: f64,
) -> Result<Projection> {
    let n = basis.xbar().nrows();
    let mut states = Vec::with_capacity(trajectory.len());
    let mut max_defect: f64 = 0.0;
    let mut out_of_subspace = false;
    for (k, x) in trajectory.iter().enumerate() {
        dim_check(x.len() == n, || format!("state {k} has length {}, expected {n}", x.len()))?;
        let xbar = basis.xbar_left() * x;
        let defect = (x - basis.xbar() * &xbar).norm();
        out_of_subspace |= defect > tol * x.norm().max(1.0);
        max_defect = max_defect.max(defect);
        states.push(xbar);
    }
    Ok(Projection {
        states,
        max_defect,
        out_of_subspace,
    })
}

/// Full coordinates `x(k) = X̄·x̄(k)`.
pub fn lift_trajectory(basis: &BasisSelection, reduced: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let s = basis.order();
    reduced
        .iter()
        .enumerate()
        .map(|(k, xbar)| {
            dim_check(xbar.len() == s, || {
                format!("reduced state {k} has length {}, expected {s}", xbar.len())
            })?;
            Ok(basis.xbar() * xbar)
        })
        .collect()
}
