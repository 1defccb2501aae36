//! Search of the θ-family for a Schur-stable reduced model.
//!
//! With `Z = θ·P` the stability inequality `P − A_θ P A_θᵀ ≻ 0` becomes the
//! LMI `[[P, X̄ℓX₊Z], [(X̄ℓX₊Z)ᵀ, P]] ≻ 0` subject to `X̄P − XZ = 0`. Strict
//! inequalities are replaced by `⪰ margin·I`, and `P ⪯ (1 − margin)·I`
//! normalizes the otherwise homogeneous problem.
//!
//! Optionally the contraction factor `γ` in `[[γP, X̄ℓX₊Z], [·, γP]]` is
//! bisected below one; any solution for `γ < 1` also satisfies the plain
//! inequality, and certifies `ρ(A_θ) ≤ γ`.

pub mod sdp;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::data_model::{right_inverse_tol, BasisSelection, SnapshotRecord};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{eigenvalues, min_symmetric_eigenvalue, numerical_rank, pseudo_inverse};
use crate::matrix_serde;
use crate::reduction::{check_invariance, reduced_state_matrix_theta, solve_feedback_gain};
use sdp::{AffineSymmetric, Feasibility, LmiProblem, LmiSolver, SolverStatus};

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    dim_check(m.is_square(), || {
        format!("spectral radius needs a square matrix, got {}x{}", m.nrows(), m.ncols())
    })?;
    Ok(eigenvalues(m).iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// A stable family member together with its LMI witness.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizationCertificate {
    #[serde(with = "matrix_serde::rows")]
    pub theta: DMatrix<f64>,
    #[serde(rename = "P", with = "matrix_serde::rows")]
    pub p: DMatrix<f64>,
    #[serde(rename = "Z", with = "matrix_serde::rows")]
    pub z: DMatrix<f64>,
    #[serde(rename = "K", with = "matrix_serde::rows")]
    pub k: DMatrix<f64>,
    #[serde(with = "matrix_serde::rows")]
    pub a_theta: DMatrix<f64>,
    pub spectral_radius: f64,
    /// Smallest certified contraction factor `γ ≥ ρ(A_θ)`.
    pub contraction: f64,
    /// Requested margin of the relaxed strict inequalities.
    pub lmi_margin: f64,
    /// Smallest eigenvalue of `P` and of the block matrix.
    pub achieved_margin: f64,
    pub invariant: bool,
    pub invariance_residual: f64,
    /// `‖X̄P − XZ‖_F`.
    pub equality_residual: f64,
    /// `‖UZ − KX̄P‖_F`.
    pub gain_residual: f64,
    pub solver_status: String,
    pub solver_iterations: usize,
}

#[derive(Clone, Debug)]
pub enum StabilizationOutcome {
    Certified(Box<StabilizationCertificate>),
    Infeasible {
        status: SolverStatus,
        margin_bound: Option<f64>,
    },
}

fn symmetric_basis(s: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(s * (s + 1) / 2);
    for j in 0..s {
        for i in 0..=j {
            let mut b = DMatrix::zeros(s, s);
            b[(i, j)] = 1.0;
            b[(j, i)] = 1.0;
            out.push(b);
        }
    }
    out
}

fn block(top_left: &DMatrix<f64>, top_right: &DMatrix<f64>, bottom_right: &DMatrix<f64>) -> DMatrix<f64> {
    let s = top_left.nrows();
    let mut out = DMatrix::zeros(2 * s, 2 * s);
    out.view_mut((0, 0), (s, s)).copy_from(top_left);
    out.view_mut((0, s), (s, s)).copy_from(top_right);
    out.view_mut((s, 0), (s, s)).copy_from(&top_right.transpose());
    out.view_mut((s, s), (s, s)).copy_from(bottom_right);
    out
}

/// The stability LMI over `x = (vech P, vec Z)` (column-major `Z`) with
/// contraction factor `gamma` (`1` for plain stability).
pub fn stability_problem(record: &SnapshotRecord, basis: &BasisSelection, margin: f64, gamma: f64) -> LmiProblem {
    let s = basis.order();
    let samples = record.samples();
    let n = record.n();
    let h = basis.xbar_left() * record.xplus();
    let sym = symmetric_basis(s);
    let p_vars = sym.len();
    let num_vars = p_vars + samples * s;

    let zero_s = DMatrix::zeros(s, s);
    let mut p_terms = Vec::with_capacity(num_vars);
    let mut block_terms = Vec::with_capacity(num_vars);
    let mut cap_terms = Vec::with_capacity(num_vars);
    let mut equalities = DMatrix::zeros(n * s, num_vars);

    for (v, b) in sym.iter().enumerate() {
        p_terms.push(b.clone());
        block_terms.push(block(&(b * gamma), &zero_s, &(b * gamma)));
        cap_terms.push(-b);
        let xb = basis.xbar() * b;
        equalities.set_column(v, &DMatrix::from_column_slice(n * s, 1, xb.as_slice()).column(0));
    }
    for c in 0..s {
        for r in 0..samples {
            // Z = e_r e_cᵀ.
            let mut g = DMatrix::zeros(s, s);
            g.set_column(c, &h.column(r));
            p_terms.push(zero_s.clone());
            block_terms.push(block(&zero_s, &g, &zero_s));
            cap_terms.push(zero_s.clone());
            let mut xz = DMatrix::zeros(n, s);
            xz.set_column(c, &(-record.x().column(r)));
            equalities.set_column(
                p_vars + c * samples + r,
                &DMatrix::from_column_slice(n * s, 1, xz.as_slice()).column(0),
            );
        }
    }
    LmiProblem {
        num_vars,
        lmis: vec![
            AffineSymmetric {
                constant: zero_s.clone(),
                terms: p_terms,
            },
            AffineSymmetric {
                constant: DMatrix::zeros(2 * s, 2 * s),
                terms: block_terms,
            },
            AffineSymmetric {
                constant: DMatrix::identity(s, s),
                terms: cap_terms,
            },
        ],
        equalities: Some((equalities, nalgebra::DVector::zeros(n * s))),
        margin,
    }
}

fn unpack(x: &nalgebra::DVector<f64>, s: usize, samples: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut p = DMatrix::zeros(s, s);
    let mut v = 0;
    for j in 0..s {
        for i in 0..=j {
            p[(i, j)] = x[v];
            p[(j, i)] = x[v];
            v += 1;
        }
    }
    let z = DMatrix::from_column_slice(samples, s, &x.as_slice()[v..]);
    (p, z)
}

/// Share of the plain-problem margin required from contraction refinements.
const REFINE_FRACTION: f64 = 0.1;

/// Parameters of [`stabilize`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilizeOptions {
    /// Margin replacing the strict inequalities.
    pub margin: f64,
    /// Tolerance of the invariance re-check on the recovered `θ`.
    pub inv_tol: f64,
    /// Bisection steps on the contraction factor after plain feasibility; `0`
    /// returns the first stabilizing solution.
    pub contraction_steps: usize,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        Self {
            margin: 1e-8,
            inv_tol: 1e-7,
            contraction_steps: 6,
        }
    }
}

/// Runs the LMI search and assembles a certificate when it succeeds.
///
/// Feasibility is decided by the plain (`γ = 1`) problem alone; the
/// contraction bisection only refines an existing certificate.
pub fn stabilize(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    options: &StabilizeOptions,
    solver: &dyn LmiSolver,
) -> Result<StabilizationOutcome> {
    let margin = options.margin;
    if !(margin > 0.0 && margin < 0.5) {
        return Err(Error::Parameter(format!("margin must lie in (0, 0.5), got {margin}")));
    }
    let solve = |gamma: f64, margin: f64| solver.solve_feasibility(&stability_problem(record, basis, margin, gamma));
    let (mut x, mut achieved, mut iterations) = match solve(1.0, margin)? {
        Feasibility::Feasible {
            x,
            achieved_margin,
            iterations,
        } => (x, achieved_margin, iterations),
        Feasibility::Infeasible {
            status,
            margin_bound,
        } => {
            return Ok(StabilizationOutcome::Infeasible {
                status,
                margin_bound,
            })
        }
    };
    // All constraints but `P ⪯ I` are homogeneous, so the best margin tends to
    // zero as γ approaches its optimum; refinements demand a fixed fraction of
    // the plain margin, which keeps them well conditioned and quick to reject.
    let refine_margin = margin.max(REFINE_FRACTION * achieved);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..options.contraction_steps {
        let mid = 0.5 * (lo + hi);
        match solve(mid, refine_margin) {
            Ok(Feasibility::Feasible {
                x: xm,
                achieved_margin,
                iterations: it,
            }) => {
                hi = mid;
                x = xm;
                achieved = achieved_margin;
                iterations += it;
            }
            // A failed refinement leaves the certificate in hand untouched.
            Ok(Feasibility::Infeasible { .. }) | Err(sdp::SolverError::Numerical(_)) => lo = mid,
            Err(e) => return Err(e.into()),
        }
    }
    let s = basis.order();
    let (p, z) = unpack(&x, s, record.samples());
    let p_inv = p
        .clone()
        .cholesky()
        .ok_or_else(|| sdp::SolverError::Numerical("returned P is not positive definite".into()))?
        .inverse();
    // `Z·P⁻¹` amplifies the equality residual by `‖P⁻¹‖`; the least-norm
    // correction puts `θ` back on `X·θ = X̄`, and stability is re-verified below.
    let raw = &z * &p_inv;
    let theta = &raw + pseudo_inverse(record.x(), basis.rank_tol()) * (basis.xbar() - record.x() * &raw);
    let a_theta = reduced_state_matrix_theta(record, basis, &theta)?;
    let rho = spectral_radius(&a_theta)?;
    let xbar_p = basis.xbar() * &p;
    let k = solve_feedback_gain(record, basis, &theta, None)?;
    let gain_residual = (record.u() * &z - &k * &xbar_p).norm();
    let equality_residual = (&xbar_p - record.x() * &z).norm();
    let inv = check_invariance(record, basis, &theta, options.inv_tol)?;
    let hz = basis.xbar_left() * record.xplus() * &z;
    let witness = min_symmetric_eigenvalue(&p).min(min_symmetric_eigenvalue(&block(&p, &hz, &p)));
    if rho >= 1.0 {
        return Err(sdp::SolverError::Numerical(format!(
            "certificate verification failed: spectral radius {rho}"
        ))
        .into());
    }
    Ok(StabilizationOutcome::Certified(Box::new(StabilizationCertificate {
        theta,
        p,
        z,
        k,
        a_theta,
        spectral_radius: rho,
        contraction: hi,
        lmi_margin: margin,
        achieved_margin: witness.min(achieved),
        invariant: inv.contained,
        invariance_residual: inv.residual,
        equality_residual,
        gain_residual,
        solver_status: SolverStatus::Feasible.as_str().to_owned(),
        solver_iterations: iterations,
    })))
}

/// Gain and reduced model for data with `rank X = n`: `K = U·Xʳ`, `θ = Xʳ·X̄`.
#[derive(Clone, Debug, Serialize)]
pub struct FullRankGain {
    #[serde(rename = "K", with = "matrix_serde::rows")]
    pub k: DMatrix<f64>,
    #[serde(with = "matrix_serde::rows")]
    pub theta: DMatrix<f64>,
    #[serde(with = "matrix_serde::rows")]
    pub a_theta: DMatrix<f64>,
    /// Spectral radius of `X₊·Xʳ`, similar to `A_θ`.
    pub spectral_radius: f64,
}

pub fn full_rank_gain(record: &SnapshotRecord, basis: &BasisSelection) -> Result<FullRankGain> {
    let n = record.n();
    let rank = numerical_rank(record.x(), basis.rank_tol());
    if rank < n {
        return Err(Error::Rank(format!("rank X = {rank} < n = {n}")));
    }
    let x_right = right_inverse_tol(record.x(), basis.rank_tol())?;
    let k = record.u() * &x_right;
    let theta = &x_right * basis.xbar();
    let a_theta = reduced_state_matrix_theta(record, basis, &theta)?;
    let spectral_radius = spectral_radius(&(record.xplus() * &x_right))?;
    Ok(FullRankGain {
        k,
        theta,
        a_theta,
        spectral_radius,
    })
}
