//! End-to-end use of the public API: CSV files in, models and controllers out.

use datared_core::data_model::{
    left_inverse, right_inverse, select_basis, subspace_contains, validate_snapshots, write_matrix,
    SnapshotRecord,
};
use datared_core::reduction::{lift_trajectory, project_trajectory, theta_family, ReducedModel};
use datared_core::stabilization::sdp::BarrierSolver;
use datared_core::stabilization::{stabilize, StabilizationOutcome, StabilizeOptions};
use datared_core::steering::{synthesize_plan, InputKnowledge};
use datared_core::{Error, Tolerances};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, v)
}

/// `x(k+1) = [[0,0],[1,0]]·x + e₁·u`, sampled at `e₁`, `e₂` plus a redundant
/// snapshot `e₁ + e₂` excited by `u = 1`.
fn shift_record() -> SnapshotRecord {
    let a = m(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let b = m(2, 1, &[1.0, 0.0]);
    let x = m(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
    let u = m(1, 3, &[0.0, 0.0, 1.0]);
    let xplus = &a * &x + &b * &u;
    validate_snapshots(x, u, xplus).unwrap()
}

#[test]
fn csv_round_trip_feeds_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let record = shift_record();
    record.write_dir(dir.path()).unwrap();
    let loaded = SnapshotRecord::load_dir(dir.path()).unwrap();
    assert_eq!(loaded, record);
    let basis = select_basis(&loaded, 1e-9).unwrap();
    assert_eq!(basis.indices(), &[0, 1]);
    let model = ReducedModel::build(&loaded, &basis, basis.selector().clone(), None, 1e-7).unwrap();
    assert!(model.invariant);
    assert_eq!(model.a_theta, m(2, 2, &[0.0, 0.0, 1.0, 0.0]));
}

#[test]
fn missing_successor_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix(dir.path().join("X.csv"), &DMatrix::identity(2, 2)).unwrap();
    write_matrix(dir.path().join("U.csv"), &DMatrix::zeros(1, 2)).unwrap();
    assert!(matches!(SnapshotRecord::load_dir(dir.path()), Err(Error::Io { .. })));
}

#[test]
fn redundant_snapshot_reveals_the_input_direction() {
    let record = shift_record();
    let basis = select_basis(&record, 1e-9).unwrap();
    let knowledge = InputKnowledge::from_data(&record, 1e-9).unwrap();
    // w = (1, 1, −1)/√3 ∈ ker X, X₊w ∝ −e₁ = −B.
    let dirs = knowledge.data_directions.clone().unwrap();
    assert_eq!(dirs.ncols(), 1);
    assert!(dirs[(1, 0)].abs() < 1e-12 && dirs[(0, 0)].abs() > 0.1);

    let model = ReducedModel::build(&record, &basis, basis.selector().clone(), None, 1e-7).unwrap();
    let knowledge = knowledge.with_bleft(m(1, 2, &[1.0, 0.0]));
    let x0 = DVector::from_column_slice(&[0.5, -1.0]);
    let xf = DVector::from_column_slice(&[2.0, 1.0]);
    let plan = synthesize_plan(&record, &basis, &model, &knowledge, &x0, &xf, &Tolerances::default(), false).unwrap();
    let (a, b) = (m(2, 2, &[0.0, 0.0, 1.0, 0.0]), m(2, 1, &[1.0, 0.0]));
    let mut x = x0;
    for k in 0..plan.horizon {
        let u = plan.input(k, &x);
        x = &a * &x + &b * u;
    }
    assert!((x - xf).norm() < 1e-12);
}

#[test]
fn stabilization_certificate_is_consistent() {
    // x(k+1) = 2x + u: unstable, but the input makes it stabilizable.
    let record = validate_snapshots(m(1, 2, &[1.0, 1.0]), m(1, 2, &[0.0, -1.5]), m(1, 2, &[2.0, 0.5])).unwrap();
    let basis = select_basis(&record, 1e-9).unwrap();
    let outcome = stabilize(&record, &basis, &StabilizeOptions::default(), &BarrierSolver::default()).unwrap();
    let StabilizationOutcome::Certified(cert) = outcome else {
        panic!("expected a certificate, got {outcome:?}");
    };
    assert!(cert.spectral_radius < 1.0);
    assert!((record.x() * &cert.theta - basis.xbar()).norm() < 1e-10);
    // The true closed loop 2 + K is the reduced model itself here.
    assert!((2.0 + cert.k[(0, 0)] - cert.a_theta[(0, 0)]).abs() < 1e-9);
}

#[test]
fn unstable_data_without_excitation_is_infeasible() {
    let record = validate_snapshots(DMatrix::identity(2, 2), DMatrix::zeros(1, 2), DMatrix::identity(2, 2) * 2.0).unwrap();
    let basis = select_basis(&record, 1e-9).unwrap();
    let outcome = stabilize(&record, &basis, &StabilizeOptions::default(), &BarrierSolver::default()).unwrap();
    assert!(matches!(outcome, StabilizationOutcome::Infeasible { .. }));
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-3.0f64..3.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn snapshots() -> impl Strategy<Value = SnapshotRecord> {
    (1usize..6, 1usize..3, 1usize..8, 0usize..3)
        .prop_flat_map(|(n, m, samples, rank_drop)| {
            let r = n.saturating_sub(rank_drop).max(1);
            (matrix(n, r), matrix(r, samples), matrix(m, samples), matrix(n, samples))
        })
        .prop_map(|(f, g, u, xplus)| validate_snapshots(&f * &g, u, xplus).unwrap())
}

proptest! {
    #[test]
    fn basis_invariants_hold(record in snapshots()) {
        let basis = select_basis(&record, 1e-9).unwrap();
        let again = select_basis(&record, 1e-9).unwrap();
        prop_assert_eq!(basis.indices(), again.indices());
        prop_assert_eq!(basis.xbar(), &(record.x() * basis.selector()));
        prop_assert_eq!(basis.ubar(), &(record.u() * basis.selector()));
        let identity = DMatrix::<f64>::identity(basis.order(), basis.order());
        prop_assert!((basis.xbar_left() * basis.xbar() - identity).norm() < 1e-10);
        let span = basis.data_subspace();
        prop_assert!(subspace_contains(&span, basis.xbar(), 1e-8).unwrap().contained);
        prop_assert!(subspace_contains(&span, record.x(), 1e-8).unwrap().contained);
    }

    #[test]
    fn every_family_member_matches_the_basis(record in snapshots(), seed in 0u64..1000) {
        let basis = select_basis(&record, 1e-9).unwrap();
        let family = theta_family(&record, &basis).unwrap();
        let theta = family.sample(seed, 1.0);
        prop_assert!((record.x() * &theta - basis.xbar()).norm() <= 1e-8 * basis.xbar().norm().max(1.0));
        let model = ReducedModel::build(&record, &basis, theta, None, 1e-7).unwrap();
        prop_assert!(model.gain_residual <= 1e-8 * (1.0 + record.u().norm()));
    }

    #[test]
    fn projection_inverts_lifting(record in snapshots(), coeffs in proptest::collection::vec(-2.0f64..2.0, 5)) {
        let basis = select_basis(&record, 1e-9).unwrap();
        let s = basis.order();
        let reduced: Vec<DVector<f64>> = coeffs.chunks(1).map(|c| DVector::from_element(s, c[0])).collect();
        let lifted = lift_trajectory(&basis, &reduced).unwrap();
        let back = project_trajectory(&basis, &lifted, 1e-8).unwrap();
        for (a, b) in back.states.iter().zip(&reduced) {
            prop_assert!((a - b).norm() <= 1e-8 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn inverses_round_trip(tall in matrix(5, 3), wide in matrix(2, 4)) {
        let rank = |mtx: &DMatrix<f64>| datared_core::linalg::numerical_rank(mtx, 1e-6);
        prop_assume!(rank(&tall) == 3 && rank(&wide) == 2);
        let l = left_inverse(&tall).unwrap();
        prop_assert!((l * &tall - DMatrix::<f64>::identity(3, 3)).norm() < 1e-10);
        let r = right_inverse(&wide).unwrap();
        prop_assert!((&wide * r - DMatrix::<f64>::identity(2, 2)).norm() < 1e-10);
    }
}
