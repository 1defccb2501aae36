//! Model-based identities checked against the true `(A, B)`.

use datared_core::data_model::{subspace_contains, BasisSelection, SnapshotRecord};
use datared_core::linalg::eigenvalues;
use datared_core::reduction::{lift_trajectory, project_trajectory, ReducedModel};
use nalgebra::DVector;
use serde::Serialize;

use crate::error::Result;
use crate::system::{simulate_closed_loop, simulate_reduced, TrueSystem};

/// Thresholds used for the pass/fail flags of a report.
pub const DATA_TOL: f64 = 1e-12;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-6;

/// Residuals of the model-based identities for one `(record, model)` pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    /// `‖X₊ − AX − BU‖_F / max(1, ‖X₊‖_F)`.
    pub data_residual: f64,
    /// `‖X̄ℓ(AX̄ + BKX̄) − A_θ‖_F`: the `B`-dependent model collapses onto `A_θ`.
    pub collapse_residual: f64,
    /// `‖(A+BK)X̄ − X̄A_θ‖_F / ‖X̄‖_F`.
    pub intertwining_residual: f64,
    /// `max_i min_j |λᵢ(A_θ) − λⱼ(A+BK)|`.
    pub eigen_inclusion: f64,
    /// `max_k ‖X̄ℓX̄x̄(k) − x̄(k)‖ / (1 + ‖x̄(k)‖)` along a free reduced run.
    pub lift_round_trip: f64,
    /// `max_k ‖X̄ℓx(k) − x̄(k)‖ / (1 + ‖x̄(k)‖)` with `x` the closed-loop full run
    /// from `x(0) = X̄x̄(0)`.
    pub projection_residual: f64,
    /// Projection defect of `(A+BK)X̄` onto `𝒳`, relative to `‖(A+BK)X̄‖_F`.
    pub closed_loop_invariance: f64,
    /// Data-only invariance verdict stored in the model.
    pub invariant: bool,
    /// Names of identities exceeding their threshold.
    pub flagged: Vec<String>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.flagged.is_empty()
    }
}

fn max_relative_gap(lhs: &[DVector<f64>], rhs: &[DVector<f64>]) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).norm() / (1.0 + b.norm()))
        .fold(0.0, f64::max)
}

/// Evaluates identities (a)–(f) for `model` built on `record` from `sys`;
/// trajectories run for `steps` steps.
pub fn verify_identities(
    sys: &TrueSystem,
    record: &SnapshotRecord,
    basis: &BasisSelection,
    model: &ReducedModel,
    steps: usize,
) -> Result<IdentityReport> {
    let xbar = basis.xbar();
    let xbar_left = basis.xbar_left();
    let closed = sys.closed_loop(&model.k);

    let data_residual = (record.xplus() - sys.map(record.x(), record.u())).norm() / record.xplus().norm().max(1.0);
    let collapse_residual = (xbar_left * sys.map(xbar, &(&model.k * xbar)) - &model.a_theta).norm();
    let image = &closed * xbar;
    let intertwining_residual = (&image - xbar * &model.a_theta).norm() / xbar.norm();

    let full_eigs = eigenvalues(&closed);
    let eigen_inclusion = eigenvalues(&model.a_theta)
        .iter()
        .map(|l| full_eigs.iter().map(|m| (l - m).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);

    let s = basis.order();
    let xbar0 = DVector::from_element(s, 1.0);
    let reduced = simulate_reduced(&model.a_theta, &xbar0, &vec![DVector::zeros(s); steps])?;
    let lifted = lift_trajectory(basis, &reduced)?;
    let back = project_trajectory(basis, &lifted, basis.rank_tol())?;
    let lift_round_trip = max_relative_gap(&back.states, &reduced);
    let (full, _) = simulate_closed_loop(sys, &lifted[0], steps, |_, x| &model.k * x)?;
    let projected = project_trajectory(basis, &full, basis.rank_tol())?;
    let projection_residual = max_relative_gap(&projected.states, &reduced);

    let sub = basis.data_subspace();
    let closed_loop_invariance = subspace_contains(&sub, &image, 0.0)?.residual / image.norm().max(1.0);

    let mut flagged = Vec::new();
    let mut flag = |name: &str, value: f64, tol: f64| {
        if !(value <= tol) {
            flagged.push(name.to_string());
        }
    };
    flag("data", data_residual, DATA_TOL);
    flag("collapse", collapse_residual, IDENTITY_TOL * (1.0 + model.a_theta.norm()));
    flag("intertwining", intertwining_residual, IDENTITY_TOL);
    flag("eigen_inclusion", eigen_inclusion, EIGEN_TOL);
    flag("lift_round_trip", lift_round_trip, IDENTITY_TOL);
    flag("projection", projection_residual, IDENTITY_TOL);
    flag("closed_loop_invariance", closed_loop_invariance, IDENTITY_TOL);

    Ok(IdentityReport {
        data_residual,
        collapse_residual,
        intertwining_residual,
        eigen_inclusion,
        lift_round_trip,
        projection_residual,
        closed_loop_invariance,
        invariant: model.invariant,
        flagged,
    })
}
