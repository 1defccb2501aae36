//! `s`-step steering of the full system through the reduced model.
//!
//! Admissible reduced inputs come from partial knowledge of `im B`: user
//! supplied columns `B*` and the data directions `X₊·w`, `w ∈ ker X`.
//! Directions are kept only where they also lie in `𝒳`, so that
//! `X̄·ū ∈ im B ∩ 𝒳`. The plan applies `u(k) = K·x(k) + v(k)` with
//! `v(k) = Bℓ·X̄·ū(k)`.
//!
//! Stacked reduced inputs follow the reversed-time convention
//! `ū_col = col(ū(s−1), …, ū(0))`, matching the reachability matrix
//! `R_W = [W, A_θW, …, A_θ^{s−1}W]`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data_model::{
    nullspace_basis, subspace_contains, BasisSelection, SnapshotRecord, SubspaceBasis,
};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{kernel_below, matrix_power, numerical_rank, orthonormal_range, pseudo_inverse};
use crate::matrix_serde;
use crate::reduction::ReducedModel;
use crate::Tolerances;

/// Label of the stacking order used in serialized plans.
pub const CONVENTION: &str = "col(u(s-1)..u(0))";

/// What is known about the input matrix without identifying it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InputKnowledge {
    /// `n × p` with `im B* ⊆ im B` (user asserted).
    pub bstar: Option<DMatrix<f64>>,
    /// `m × n` left inverse of `B` (user asserted).
    pub bleft: Option<DMatrix<f64>>,
    /// `X₊·N_ker`, which lies in `im B` for any data.
    pub data_directions: Option<DMatrix<f64>>,
}

impl InputKnowledge {
    /// Knowledge obtainable from the record alone: the data directions.
    pub fn from_data(record: &SnapshotRecord, rank_tol: f64) -> Result<Self> {
        let kernel = nullspace_basis(record.x(), rank_tol)?;
        let data_directions = (!kernel.is_empty()).then(|| record.xplus() * kernel.matrix());
        Ok(Self {
            bstar: None,
            bleft: None,
            data_directions,
        })
    }

    pub fn with_bstar(mut self, bstar: DMatrix<f64>) -> Self {
        self.bstar = Some(bstar);
        self
    }

    pub fn with_bleft(mut self, bleft: DMatrix<f64>) -> Self {
        self.bleft = Some(bleft);
        self
    }
}

/// Reduced input directions `W` (orthonormal columns in `ℝˢ`) with
/// `X̄·im W ⊆ im B` drawn from the knowledge sources.
pub fn candidate_w(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    knowledge: &InputKnowledge,
    tol: f64,
) -> Result<DMatrix<f64>> {
    let n = record.n();
    let mut sources: Vec<&DMatrix<f64>> = Vec::new();
    if let Some(b) = &knowledge.bstar {
        dim_check(b.nrows() == n, || format!("B* has {} rows, expected {n}", b.nrows()))?;
        sources.push(b);
    }
    if let Some(d) = &knowledge.data_directions {
        dim_check(d.nrows() == n, || format!("data directions have {} rows, expected {n}", d.nrows()))?;
        sources.push(d);
    }
    let total: usize = sources.iter().map(|m| m.ncols()).sum();
    let mut stacked = DMatrix::zeros(n, total);
    let mut col = 0;
    for m in sources {
        stacked.view_mut((0, col), (n, m.ncols())).copy_from(m);
        col += m.ncols();
    }
    let candidates = orthonormal_range(&stacked, basis.rank_tol());
    if candidates.ncols() == 0 {
        return Err(Error::EmptyW("no input knowledge supplied".into()));
    }
    // span(candidates) ∩ 𝒳: coefficients annihilated by (I − Π).
    let subspace = basis.data_subspace();
    let outside = subspace.defect(&candidates);
    let coeffs = kernel_below(&outside, tol);
    if coeffs.ncols() == 0 {
        return Err(Error::EmptyW("no known direction of im B lies in the data subspace".into()));
    }
    let admissible = &candidates * coeffs;
    let w = orthonormal_range(&(basis.xbar_left() * admissible), basis.rank_tol());
    if w.ncols() == 0 {
        return Err(Error::EmptyW("admissible directions vanish in reduced coordinates".into()));
    }
    Ok(w)
}

/// `R_W = [W, A_θW, …, A_θ^{s−1}W]`.
pub fn reachability_matrix(a_theta: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let s = a_theta.nrows();
    dim_check(a_theta.is_square() && w.nrows() == s, || {
        format!(
            "A_theta is {}x{} and W is {}x{}",
            a_theta.nrows(),
            a_theta.ncols(),
            w.nrows(),
            w.ncols()
        )
    })?;
    let cols = w.ncols();
    let mut out = DMatrix::zeros(s, s * cols);
    let mut power = w.clone();
    for k in 0..s {
        out.view_mut((0, k * cols), (s, cols)).copy_from(&power);
        power = a_theta * power;
    }
    Ok(out)
}

/// `rank R_W = s` at relative tolerance `tol`.
pub fn check_reachable(a_theta: &DMatrix<f64>, w: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let r = reachability_matrix(a_theta, w)?;
    Ok(numerical_rank(&r, tol) == a_theta.nrows())
}

/// Reduced steering inputs in time order and stacked form.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedInputs {
    /// `ū(0), …, ū(s−1)`.
    pub sequence: Vec<DVector<f64>>,
    /// `col(ū(s−1), …, ū(0))`.
    pub stacked: DVector<f64>,
}

impl ReducedInputs {
    fn from_stacked(stacked: DVector<f64>, s: usize) -> Self {
        let sequence = (0..s).map(|k| stacked.rows((s - 1 - k) * s, s).into_owned()).collect();
        Self { sequence, stacked }
    }
}

fn steering_rhs(a_theta: &DMatrix<f64>, xbar0: &DVector<f64>, xbarf: &DVector<f64>) -> Result<DVector<f64>> {
    let s = a_theta.nrows();
    dim_check(xbar0.len() == s && xbarf.len() == s, || {
        format!("reduced states must have length {s}")
    })?;
    Ok(xbarf - matrix_power(a_theta, s) * xbar0)
}

/// Minimum-norm `ū_col = (I_s ⊗ W)·(R_W)ʳ·(x̄_f − A_θˢ·x̄₀)`.
///
/// `W` is replaced by an orthonormal basis of its range first; the resulting
/// right inverse makes `‖ū_col‖` minimal over all inputs with `ū(k) ∈ im W`.
pub fn steering_inputs(
    a_theta: &DMatrix<f64>,
    w: &DMatrix<f64>,
    xbar0: &DVector<f64>,
    xbarf: &DVector<f64>,
    tol: f64,
) -> Result<ReducedInputs> {
    let s = a_theta.nrows();
    let rhs = steering_rhs(a_theta, xbar0, xbarf)?;
    dim_check(w.nrows() == s, || format!("W must have {s} rows"))?;
    let w = orthonormal_range(w, tol);
    if !check_reachable(a_theta, &w, tol)? {
        return Err(Error::Reachability(format!(
            "(A_theta, W) has reachability rank below {s}"
        )));
    }
    let r_w = reachability_matrix(a_theta, &w)?;
    let hat = pseudo_inverse(&r_w, tol) * rhs;
    let q = w.ncols();
    let mut stacked = DVector::zeros(s * s);
    for k in 0..s {
        stacked
            .rows_mut(k * s, s)
            .copy_from(&(&w * hat.rows(k * q, q)));
    }
    Ok(ReducedInputs::from_stacked(stacked, s))
}

/// Solves `x̄_f − A_θˢx̄₀ = [I, A_θ, …, A_θ^{s−1}]·ū_col` without restricting
/// the inputs, then checks membership of every `ū(k)` in `im W`.
pub fn steering_inputs_direct(
    a_theta: &DMatrix<f64>,
    w: &DMatrix<f64>,
    xbar0: &DVector<f64>,
    xbarf: &DVector<f64>,
    tol: f64,
) -> Result<ReducedInputs> {
    let s = a_theta.nrows();
    let rhs = steering_rhs(a_theta, xbar0, xbarf)?;
    let powers = reachability_matrix(a_theta, &DMatrix::identity(s, s))?;
    let stacked = pseudo_inverse(&powers, tol) * rhs;
    let inputs = ReducedInputs::from_stacked(stacked, s);
    let span = SubspaceBasis::span(w, tol);
    let all = crate::linalg::stack_columns(&inputs.sequence, s);
    let membership = subspace_contains(&span, &all, tol)?;
    if !membership.contained {
        return Err(Error::Subspace(format!(
            "direct solution leaves im W (defect {:.3e})",
            membership.residual
        )));
    }
    Ok(inputs)
}

/// The mixed open-loop / closed-loop law `u(k) = K·x(k) + v(k)`, `k < s`.
#[derive(Clone, Debug, Serialize)]
pub struct SteeringPlan {
    /// `ū(0), …, ū(s−1)`.
    #[serde(skip)]
    pub ubar_seq: Vec<DVector<f64>>,
    /// `v(0), …, v(s−1)`.
    #[serde(skip)]
    pub v_seq: Vec<DVector<f64>>,
    /// Rows in stacked order `ū(s−1), …, ū(0)`.
    #[serde(rename = "ubar", with = "matrix_serde::vectors")]
    pub ubar_stacked: Vec<DVector<f64>>,
    /// Rows in stacked order `v(s−1), …, v(0)`.
    #[serde(rename = "v", with = "matrix_serde::vectors")]
    pub v_stacked: Vec<DVector<f64>>,
    #[serde(rename = "K", with = "matrix_serde::rows")]
    pub k: DMatrix<f64>,
    #[serde(rename = "W", with = "matrix_serde::rows")]
    pub w: DMatrix<f64>,
    pub horizon: usize,
    pub convention: &'static str,
    /// `‖x(s) − x_f‖`, filled in after a closed-loop run.
    pub endpoint_residual: Option<f64>,
}

impl SteeringPlan {
    /// Control input at step `k` given the measured state.
    pub fn input(&self, k: usize, x: &DVector<f64>) -> DVector<f64> {
        &self.k * x + &self.v_seq[k]
    }
}

/// Builds the steering plan from `x0` to `xf`, both required to lie in `𝒳`.
pub fn synthesize_plan(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    model: &ReducedModel,
    knowledge: &InputKnowledge,
    x0: &DVector<f64>,
    xf: &DVector<f64>,
    tols: &Tolerances,
    direct: bool,
) -> Result<SteeringPlan> {
    let n = record.n();
    dim_check(x0.len() == n && xf.len() == n, || format!("x0 and xf must have length {n}"))?;
    let subspace = basis.data_subspace();
    for (name, x) in [("x0", x0), ("xf", xf)] {
        let c = subspace_contains(&subspace, &DMatrix::from_column_slice(n, 1, x.as_slice()), tols.subspace_tol)?;
        if !c.contained {
            return Err(Error::Subspace(format!(
                "{name} is outside the data subspace (defect {:.3e})",
                c.residual
            )));
        }
    }
    if !model.invariant {
        return Err(Error::Subspace(format!(
            "im(X₊θ) is not contained in the data subspace (residual {:.3e})",
            model.invariance_residual
        )));
    }
    let bleft = knowledge
        .bleft
        .as_ref()
        .ok_or_else(|| Error::Knowledge("a left inverse of B is required to realize inputs".into()))?;
    dim_check(bleft.shape() == (record.m(), n), || {
        format!("Bleft must be {}x{n}", record.m())
    })?;
    let w = candidate_w(record, basis, knowledge, tols.subspace_tol)?;
    let xbar0 = basis.xbar_left() * x0;
    let xbarf = basis.xbar_left() * xf;
    let inputs = if direct {
        steering_inputs_direct(&model.a_theta, &w, &xbar0, &xbarf, tols.reach_tol)?
    } else {
        steering_inputs(&model.a_theta, &w, &xbar0, &xbarf, tols.reach_tol)?
    };
    let v_seq: Vec<DVector<f64>> = inputs
        .sequence
        .iter()
        .map(|u| bleft * (basis.xbar() * u))
        .collect();
    let s = basis.order();
    Ok(SteeringPlan {
        ubar_stacked: inputs.sequence.iter().rev().cloned().collect(),
        v_stacked: v_seq.iter().rev().cloned().collect(),
        ubar_seq: inputs.sequence,
        v_seq,
        k: model.k.clone(),
        w,
        horizon: s,
        convention: CONVENTION,
        endpoint_residual: None,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::{select_basis, validate_snapshots};
    use crate::reduction::ReducedModel;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn col(x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(x.len(), 1, x)
    }

    fn shift() -> DMatrix<f64> {
        m(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    fn simulate(a: &DMatrix<f64>, x0: &DVector<f64>, u: &[DVector<f64>]) -> DVector<f64> {
        u.iter().fold(x0.clone(), |x, uk| a * x + uk)
    }

    #[test]
    fn reachability_matrix_examples() {
        let r = reachability_matrix(&shift(), &col(&[0.0, 1.0])).unwrap();
        assert_eq!(r, m(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert!(check_reachable(&shift(), &col(&[0.0, 1.0]), 1e-9).unwrap());

        let zero = DMatrix::zeros(2, 1);
        assert_eq!(reachability_matrix(&shift(), &zero).unwrap(), DMatrix::zeros(2, 2));
        assert!(!check_reachable(&shift(), &zero, 1e-9).unwrap());

        let one = m(1, 1, &[1.0]);
        assert_eq!(reachability_matrix(&m(1, 1, &[0.3]), &one).unwrap(), one);
        assert!(check_reachable(&m(1, 1, &[0.3]), &one, 1e-9).unwrap());

        assert!(matches!(
            reachability_matrix(&shift(), &DMatrix::zeros(3, 1)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn scalar_steering() {
        let out = steering_inputs(&m(1, 1, &[0.0]), &m(1, 1, &[1.0]), &v(&[0.0]), &v(&[5.0]), 1e-9).unwrap();
        assert!((out.sequence[0][0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn homogeneous_target_needs_no_input() {
        let a = m(2, 2, &[0.5, 0.2, -0.1, 0.3]);
        let x0 = v(&[1.0, -2.0]);
        let xf = &a * &a * &x0;
        let out = steering_inputs(&a, &DMatrix::identity(2, 2), &x0, &xf, 1e-9).unwrap();
        assert!(out.stacked.norm() < 1e-14);
    }

    #[test]
    fn two_step_shift_example() {
        let w = col(&[0.0, 1.0]);
        let out = steering_inputs(&shift(), &w, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 1e-9).unwrap();
        assert!((&out.sequence[0] - v(&[0.0, 1.0])).norm() < 1e-14);
        assert!((&out.sequence[1] - v(&[0.0, 1.0])).norm() < 1e-14);
        let end = simulate(&shift(), &v(&[0.0, 0.0]), &out.sequence);
        assert!((end - v(&[1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn stacking_is_reversed_in_time() {
        // Target (1,2) forces ū(0) = (0,1) and ū(1) = (0,2).
        let w = col(&[0.0, 1.0]);
        let out = steering_inputs(&shift(), &w, &v(&[0.0, 0.0]), &v(&[1.0, 2.0]), 1e-9).unwrap();
        assert!((&out.sequence[0] - v(&[0.0, 1.0])).norm() < 1e-14);
        assert!((&out.sequence[1] - v(&[0.0, 2.0])).norm() < 1e-14);
        assert!((&out.stacked - v(&[0.0, 2.0, 0.0, 1.0])).norm() < 1e-14);
        let end = simulate(&shift(), &v(&[0.0, 0.0]), &out.sequence);
        assert!((end - v(&[1.0, 2.0])).norm() < 1e-14);
    }

    #[test]
    fn unreachable_pair_is_rejected() {
        let err = steering_inputs(&DMatrix::zeros(2, 2), &col(&[1.0, 0.0]), &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 1e-9);
        assert!(matches!(err, Err(Error::Reachability(_))));
    }

    #[test]
    fn direct_solve_checks_membership() {
        let w = col(&[0.0, 1.0]);
        // Unrestricted least norm gives ū(1) = (0.5, 1), outside im W.
        let err = steering_inputs_direct(&shift(), &w, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), 1e-9);
        assert!(matches!(err, Err(Error::Subspace(_))));

        let a = m(2, 2, &[0.5, 0.2, -0.1, 0.3]);
        let full = DMatrix::identity(2, 2);
        let d = steering_inputs_direct(&a, &full, &v(&[1.0, 0.0]), &v(&[0.0, 3.0]), 1e-9).unwrap();
        let r = steering_inputs(&a, &full, &v(&[1.0, 0.0]), &v(&[0.0, 3.0]), 1e-9).unwrap();
        assert!((&d.stacked - &r.stacked).norm() < 1e-12);
    }

    fn shift_record() -> SnapshotRecord {
        // A = shift, B = e₂, X = I, U = 0.
        validate_snapshots(DMatrix::identity(2, 2), DMatrix::zeros(1, 2), shift()).unwrap()
    }

    #[test]
    fn full_rank_w_is_inverse_times_bstar() {
        let x = m(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let b = m(2, 1, &[1.0, 3.0]);
        let record = validate_snapshots(x.clone(), DMatrix::zeros(1, 2), DMatrix::zeros(2, 2)).unwrap();
        let basis = select_basis(&record, 1e-9).unwrap();
        let k = InputKnowledge::default().with_bstar(b.clone());
        let w = candidate_w(&record, &basis, &k, 1e-8).unwrap();
        assert_eq!(w.ncols(), 1);
        let expected = x.try_inverse().unwrap() * b;
        let defect = &expected - &w * (w.transpose() * &expected);
        assert!(defect.norm() < 1e-12);
    }

    #[test]
    fn data_direction_from_redundant_snapshot() {
        // X = [e₁, e₂, e₁], U = [1, 0, 0], B = e₁: X₊(e₁ − e₃) = B ∈ 𝒳.
        let a = m(3, 3, &[0.1, 0.2, 0.0, 0.3, 0.4, 0.0, 0.0, 0.0, 0.5]);
        let b = m(3, 1, &[1.0, 0.0, 0.0]);
        let x = m(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let u = m(1, 3, &[1.0, 0.0, 0.0]);
        let record = validate_snapshots(x.clone(), u.clone(), &a * &x + &b * &u).unwrap();
        let basis = select_basis(&record, 1e-9).unwrap();
        let knowledge = InputKnowledge::from_data(&record, 1e-9).unwrap();
        let dirs = knowledge.data_directions.as_ref().unwrap();
        assert_eq!(dirs.ncols(), 1);
        let w = candidate_w(&record, &basis, &knowledge, 1e-8).unwrap();
        assert_eq!(w.ncols(), 1);
        assert!((w[(0, 0)].abs() - 1.0).abs() < 1e-12 && w[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn directions_outside_data_subspace_are_dropped() {
        // im B* = span{e₂} misses 𝒳 = span{e₁}.
        let record = validate_snapshots(m(2, 1, &[1.0, 0.0]), m(1, 1, &[0.0]), m(2, 1, &[0.0, 0.0])).unwrap();
        let basis = select_basis(&record, 1e-9).unwrap();
        let k = InputKnowledge::default().with_bstar(m(2, 1, &[0.0, 1.0]));
        assert!(matches!(candidate_w(&record, &basis, &k, 1e-8), Err(Error::EmptyW(_))));
    }

    #[test]
    fn no_knowledge_is_empty_w() {
        let record = shift_record();
        let basis = select_basis(&record, 1e-9).unwrap();
        let k = InputKnowledge::from_data(&record, 1e-9).unwrap();
        assert!(k.data_directions.is_none());
        assert!(matches!(candidate_w(&record, &basis, &k, 1e-8), Err(Error::EmptyW(_))));
    }

    fn shift_plan(x0: &DVector<f64>, xf: &DVector<f64>, bleft: bool) -> Result<SteeringPlan> {
        let record = shift_record();
        let basis = select_basis(&record, 1e-9).unwrap();
        let model = ReducedModel::build(&record, &basis, basis.selector().clone(), None, 1e-7).unwrap();
        let mut k = InputKnowledge::default().with_bstar(m(2, 1, &[0.0, 1.0]));
        if bleft {
            k = k.with_bleft(m(1, 2, &[0.0, 1.0]));
        }
        synthesize_plan(&record, &basis, &model, &k, x0, xf, &Tolerances::default(), false)
    }

    #[test]
    fn shift_system_plan_reaches_target() {
        let (a, b) = (shift(), m(2, 1, &[0.0, 1.0]));
        let (x0, xf) = (v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        let plan = shift_plan(&x0, &xf, true).unwrap();
        assert_eq!(plan.horizon, 2);
        let mut x = x0.clone();
        for k in 0..plan.horizon {
            x = &a * &x + &b * plan.input(k, &x);
        }
        assert!((&x - &xf).norm() < 1e-8);
        // Brute force: x(2) = A²x₀ + A·B·u(0) + B·u(1) = (u0, u1).
        assert!(plan.v_seq[0][0].abs() < 1e-12 && (plan.v_seq[1][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plan_rejects_bad_requests() {
        let x0 = v(&[1.0, 0.0]);
        assert!(matches!(shift_plan(&x0, &x0, false), Err(Error::Knowledge(_))));

        let record = validate_snapshots(m(2, 1, &[1.0, 0.0]), m(1, 1, &[0.0]), m(2, 1, &[0.0, 0.0])).unwrap();
        let basis = select_basis(&record, 1e-9).unwrap();
        let model = ReducedModel::build(&record, &basis, basis.selector().clone(), None, 1e-7).unwrap();
        let k = InputKnowledge::default().with_bstar(m(2, 1, &[1.0, 0.0])).with_bleft(m(1, 2, &[1.0, 0.0]));
        let outside = synthesize_plan(&record, &basis, &model, &k, &x0, &v(&[0.0, 1.0]), &Tolerances::default(), false);
        assert!(matches!(outside, Err(Error::Subspace(_))));
    }

    #[test]
    fn nilpotent_plan_returns_to_start() {
        let (a, b) = (shift(), m(2, 1, &[0.0, 1.0]));
        let x0 = v(&[0.3, -0.7]);
        let plan = shift_plan(&x0, &x0, true).unwrap();
        let mut x = x0.clone();
        for k in 0..plan.horizon {
            x = &a * &x + &b * plan.input(k, &x);
        }
        assert!((&x - &x0).norm() < 1e-8);
    }

    #[test]
    fn serialized_plan_uses_stacked_order() {
        let plan = shift_plan(&v(&[0.0, 0.0]), &v(&[1.0, 2.0]), true).unwrap();
        let json: serde_json::Value = serde_json::to_value(&plan).unwrap();
        assert_eq!(json["convention"], CONVENTION);
        assert_eq!(json["horizon"], 2);
        // v(1) = 2 comes first, v(0) = 1 second.
        assert_eq!(json["v"][0][0].as_f64().unwrap(), 2.0);
        assert_eq!(json["v"][1][0].as_f64().unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn minimum_norm_matches_constrained_least_norm(
            s in 1usize..5, q in 1usize..4, seed in 0u64..400,
        ) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut gen = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
            let a = gen(s, s);
            let w = gen(s, q.min(s));
            let x0 = DVector::from_column_slice(gen(s, 1).as_slice());
            let xf = DVector::from_column_slice(gen(s, 1).as_slice());
            prop_assume!(check_reachable(&a, &w, 1e-6).unwrap());
            let out = steering_inputs(&a, &w, &x0, &xf, 1e-12).unwrap();

            // Dense reference: min ‖y‖ s.t. [I, A, …, A^{s−1}]·y = rhs and
            // every block of y annihilated by the complement projector of im W.
            let powers = reachability_matrix(&a, &DMatrix::identity(s, s)).unwrap();
            let qw = crate::linalg::orthonormal_range(&w, 1e-12);
            let comp = DMatrix::identity(s, s) - &qw * qw.transpose();
            let mut stacked = DMatrix::zeros(s + s * s, s * s);
            stacked.view_mut((0, 0), (s, s * s)).copy_from(&powers);
            for k in 0..s {
                stacked.view_mut((s + k * s, k * s), (s, s)).copy_from(&comp);
            }
            let mut rhs = DVector::zeros(s + s * s);
            rhs.rows_mut(0, s).copy_from(&(&xf - matrix_power(&a, s) * &x0));
            let reference = crate::linalg::pseudo_inverse(&stacked, 1e-12) * rhs;
            prop_assert!((&out.stacked - &reference).norm() <= 1e-8 * (1.0 + reference.norm()));

            let end = simulate(&a, &x0, &out.sequence);
            prop_assert!((end - &xf).norm() <= 1e-8 * (1.0 + xf.norm()));
        }
    }
}
