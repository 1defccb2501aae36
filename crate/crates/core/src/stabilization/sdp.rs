//! Semidefinite feasibility behind a pluggable contract.
//!
//! A problem is a list of affine symmetric matrix functions
//! `F_j(x) = F_j⁰ + Σᵢ xᵢ·F_jⁱ` together with optional linear equalities
//! `A·x = b`. It is feasible at margin `ε` when some `x` satisfies the
//! equalities and `F_j(x) ⪰ ε·I` for every `j`.
//!
//! [`BarrierSolver`] eliminates the equalities, then maximizes the common
//! margin `t` with `F_j(x) ⪰ t·I` along the log-det central path, inside a
//! ball `‖z‖ ≤ radius` in the reduced coordinates.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::linalg::{full_svd, min_symmetric_eigenvalue, rank_from_sigma};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("solver deadline of {0:?} exceeded")]
    Timeout(Duration),
    #[error("malformed problem: {0}")]
    InvalidProblem(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// `F(x) = constant + Σᵢ xᵢ·terms[i]`, all symmetric of the same size.
#[derive(Clone, Debug)]
pub struct AffineSymmetric {
    pub constant: DMatrix<f64>,
    pub terms: Vec<DMatrix<f64>>,
}

impl AffineSymmetric {
    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut out = self.constant.clone();
        for (xi, term) in x.iter().zip(&self.terms) {
            if *xi != 0.0 {
                out += term * *xi;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct LmiProblem {
    pub num_vars: usize,
    pub lmis: Vec<AffineSymmetric>,
    /// `(A, b)` with `A·x = b`.
    pub equalities: Option<(DMatrix<f64>, DVector<f64>)>,
    pub margin: f64,
}

impl LmiProblem {
    fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidProblem(msg));
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return bad(format!("margin must be positive, got {}", self.margin));
        }
        for (j, lmi) in self.lmis.iter().enumerate() {
            let d = lmi.dim();
            if lmi.constant.ncols() != d || lmi.terms.len() != self.num_vars {
                return bad(format!("constraint {j} has inconsistent shape"));
            }
            if lmi.terms.iter().any(|t| t.shape() != (d, d)) {
                return bad(format!("constraint {j} has a term of the wrong size"));
            }
        }
        if let Some((a, b)) = &self.equalities {
            if a.ncols() != self.num_vars || a.nrows() != b.len() {
                return bad("equality system has the wrong shape".into());
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue over all constraints at `x`.
    pub fn achieved_margin(&self, x: &DVector<f64>) -> f64 {
        self.lmis
            .iter()
            .map(|lmi| min_symmetric_eigenvalue(&lmi.eval(x)))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverStatus {
    Feasible,
    /// The best attainable margin inside the search ball is below the request.
    MarginUnattainable,
    InconsistentEqualities,
}

impl SolverStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverStatus::Feasible => "feasible",
            SolverStatus::MarginUnattainable => "margin_unattainable",
            SolverStatus::InconsistentEqualities => "inconsistent_equalities",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible {
        x: DVector<f64>,
        /// `min_j λ_min(F_j(x))`, at least the requested margin.
        achieved_margin: f64,
        iterations: usize,
    },
    Infeasible {
        status: SolverStatus,
        /// Upper bound on the attainable margin (when known).
        margin_bound: Option<f64>,
    },
}

pub trait LmiSolver {
    fn solve_feasibility(&self, problem: &LmiProblem) -> Result<Feasibility, SolverError>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierOptions {
    /// Wall-clock budget; `Some(0)` always times out.
    pub deadline: Option<Duration>,
    /// Radius of the search ball in reduced coordinates.
    pub radius: f64,
    /// Absolute duality-gap tolerance on the margin.
    pub gap_tol: f64,
    pub max_newton_steps: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            deadline: None,
            radius: 1e4,
            gap_tol: 1e-9,
            max_newton_steps: 2_000,
        }
    }
}

/// Primal log-barrier path-following solver.
#[derive(Clone, Debug, Default)]
pub struct BarrierSolver {
    pub options: BarrierOptions,
}

impl BarrierSolver {
    pub fn new(options: BarrierOptions) -> Self {
        Self { options }
    }
}

const EQUALITY_TOL: f64 = 1e-9;
const EQUALITY_RANK_TOL: f64 = 1e-10;

struct Reduced {
    offset: DVector<f64>,
    null: DMatrix<f64>,
    lmis: Vec<AffineSymmetric>,
}

fn eliminate_equalities(problem: &LmiProblem) -> Result<Reduced, SolverStatus> {
    let d = problem.num_vars;
    let (offset, null) = match &problem.equalities {
        None => (DVector::zeros(d), DMatrix::identity(d, d)),
        Some((a, b)) => {
            let svd = full_svd(a);
            let r = rank_from_sigma(&svd.sigma, EQUALITY_RANK_TOL);
            let mut offset = DVector::zeros(d);
            for i in 0..r {
                offset += svd.v.column(i) * (svd.u.column(i).dot(b) / svd.sigma[i]);
            }
            let residual = (a * &offset - b).norm();
            if residual > EQUALITY_TOL * b.norm().max(1.0) {
                return Err(SolverStatus::InconsistentEqualities);
            }
            (offset, svd.v.columns(r, d - r).into_owned())
        }
    };
    let keep = influential_directions(problem, &null);
    let null = null * keep;
    let lmis = problem
        .lmis
        .iter()
        .map(|lmi| {
            let constant = lmi.eval(&offset);
            let terms = (0..null.ncols())
                .map(|c| {
                    let mut acc = DMatrix::zeros(lmi.dim(), lmi.dim());
                    for (i, term) in lmi.terms.iter().enumerate() {
                        let w = null[(i, c)];
                        if w != 0.0 {
                            acc += term * w;
                        }
                    }
                    acc
                })
                .collect();
            AffineSymmetric { constant, terms }
        })
        .collect();
    Ok(Reduced { offset, null, lmis })
}

/// Orthonormal basis (in reduced coordinates) of the directions that move at
/// least one LMI; the others only feel the ball barrier and are fixed at zero.
fn influential_directions(problem: &LmiProblem, null: &DMatrix<f64>) -> DMatrix<f64> {
    let rows: usize = problem.lmis.iter().map(|l| l.dim() * l.dim()).sum();
    let mut g = DMatrix::zeros(rows, problem.num_vars);
    let mut offset = 0;
    for lmi in &problem.lmis {
        let d2 = lmi.dim() * lmi.dim();
        for (i, term) in lmi.terms.iter().enumerate() {
            g.view_mut((offset, i), (d2, 1)).copy_from_slice(term.as_slice());
        }
        offset += d2;
    }
    let reduced = g * null;
    let svd = full_svd(&reduced);
    let keep = rank_from_sigma(&svd.sigma, EQUALITY_RANK_TOL);
    svd.v.columns(0, keep).into_owned()
}

struct Barrier<'a> {
    lmis: &'a [AffineSymmetric],
    /// Per constraint, indices of terms that are not identically zero.
    active: Vec<Vec<usize>>,
    radius_sq: f64,
    vars: usize,
}

impl Barrier<'_> {
    /// Cholesky factors of every `F_j(z) − t·I`, or `None` outside the domain.
    fn slacks(&self, z: &DVector<f64>, t: f64) -> Option<Vec<nalgebra::Cholesky<f64, nalgebra::Dyn>>> {
        if z.norm_squared() >= self.radius_sq {
            return None;
        }
        self.lmis
            .iter()
            .map(|lmi| {
                let mut s = lmi.eval(z);
                for i in 0..s.nrows() {
                    s[(i, i)] -= t;
                }
                s.cholesky()
            })
            .collect()
    }

    fn value(&self, z: &DVector<f64>, t: f64, tau: f64) -> Option<f64> {
        let chols = self.slacks(z, t)?;
        let mut v = -tau * t - (self.radius_sq - z.norm_squared()).ln();
        for c in &chols {
            v -= 2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        }
        Some(v)
    }

    /// Gradient and Hessian in `(z, t)`, with `t` as the last coordinate.
    fn derivatives(
        &self,
        z: &DVector<f64>,
        chols: &[nalgebra::Cholesky<f64, nalgebra::Dyn>],
        tau: f64,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let p = self.vars;
        let mut grad = DVector::zeros(p + 1);
        let mut hess = DMatrix::zeros(p + 1, p + 1);
        let rho = self.radius_sq - z.norm_squared();
        for i in 0..p {
            grad[i] = 2.0 * z[i] / rho;
            hess[(i, i)] += 2.0 / rho;
            for k in 0..p {
                hess[(i, k)] += 4.0 * z[i] * z[k] / (rho * rho);
            }
        }
        grad[p] = -tau;
        for ((lmi, active), chol) in self.lmis.iter().zip(&self.active).zip(chols) {
            let s_inv = chol.inverse();
            let scaled: Vec<DMatrix<f64>> = active.iter().map(|&i| &s_inv * &lmi.terms[i]).collect();
            let scaled_t: Vec<DMatrix<f64>> = scaled.iter().map(|m| m.transpose()).collect();
            grad[p] += s_inv.trace();
            hess[(p, p)] += s_inv.dot(&s_inv);
            for (a, &i) in active.iter().enumerate() {
                grad[i] -= scaled[a].trace();
                let cross = -scaled[a].dot(&s_inv);
                hess[(i, p)] += cross;
                hess[(p, i)] += cross;
                for (b, &k) in active.iter().enumerate().skip(a) {
                    let h = scaled[a].dot(&scaled_t[b]);
                    hess[(i, k)] += h;
                    if k != i {
                        hess[(k, i)] += h;
                    }
                }
            }
        }
        (grad, hess)
    }
}

fn newton_direction(grad: &DVector<f64>, hess: &DMatrix<f64>) -> Option<DVector<f64>> {
    let mut h = hess.clone();
    let scale = hess.diagonal().amax().max(1e-300);
    for attempt in 0..8 {
        if let Some(chol) = h.clone().cholesky() {
            return Some(-chol.solve(grad));
        }
        let shift = scale * 1e-14 * 100f64.powi(attempt);
        for i in 0..h.nrows() {
            h[(i, i)] = hess[(i, i)] + shift;
        }
    }
    None
}

impl LmiSolver for BarrierSolver {
    fn solve_feasibility(&self, problem: &LmiProblem) -> Result<Feasibility, SolverError> {
        let started = Instant::now();
        let expired = |now: Instant| match self.options.deadline {
            Some(limit) => now.duration_since(started) >= limit,
            None => false,
        };
        if let Some(limit) = self.options.deadline {
            if limit.is_zero() {
                return Err(SolverError::Timeout(limit));
            }
        }
        problem.validate()?;

        let reduced = match eliminate_equalities(problem) {
            Ok(r) => r,
            Err(status) => {
                return Ok(Feasibility::Infeasible {
                    status,
                    margin_bound: None,
                })
            }
        };
        let lift = |z: &DVector<f64>| &reduced.offset + &reduced.null * z;
        if reduced.lmis.is_empty() {
            return Ok(Feasibility::Feasible {
                x: reduced.offset.clone(),
                achieved_margin: f64::INFINITY,
                iterations: 0,
            });
        }

        let vars = reduced.null.ncols();
        let active = reduced
            .lmis
            .iter()
            .map(|lmi| (0..vars).filter(|&i| lmi.terms[i].amax() > 0.0).collect())
            .collect();
        let barrier = Barrier {
            lmis: &reduced.lmis,
            active,
            radius_sq: self.options.radius * self.options.radius,
            vars,
        };
        let nu: f64 = reduced.lmis.iter().map(|l| l.dim() as f64).sum::<f64>() + 1.0;

        let mut z = DVector::zeros(vars);
        let start_margin = reduced
            .lmis
            .iter()
            .map(|lmi| min_symmetric_eigenvalue(&lmi.constant))
            .fold(f64::INFINITY, f64::min);
        let mut t = start_margin - 1.0;
        let mut tau = 1.0;
        let mut steps = 0usize;

        loop {
            // Centering.
            loop {
                if expired(Instant::now()) {
                    return Err(SolverError::Timeout(self.options.deadline.unwrap_or_default()));
                }
                if steps >= self.options.max_newton_steps {
                    // A verified interior point answers the feasibility question
                    // even when the margin maximization stalls.
                    let x = lift(&z);
                    let achieved = problem.achieved_margin(&x);
                    if achieved >= problem.margin {
                        return Ok(Feasibility::Feasible {
                            x,
                            achieved_margin: achieved,
                            iterations: steps,
                        });
                    }
                    return Err(SolverError::Numerical(format!(
                        "no convergence after {steps} Newton steps"
                    )));
                }
                steps += 1;
                let chols = barrier
                    .slacks(&z, t)
                    .ok_or_else(|| SolverError::Numerical("iterate left the barrier domain".into()))?;
                let (grad, hess) = barrier.derivatives(&z, &chols, tau);
                let Some(step) = newton_direction(&grad, &hess) else {
                    return Err(SolverError::Numerical("singular Newton system".into()));
                };
                let decrement = -grad.dot(&step);
                if decrement <= 1e-10 {
                    break;
                }
                let current = barrier.value(&z, t, tau).expect("iterate is interior");
                let mut alpha = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let zt = &z + step.rows(0, vars) * alpha;
                    let tt = t + step[vars] * alpha;
                    if let Some(v) = barrier.value(&zt, tt, tau) {
                        if v <= current - 0.25 * alpha * decrement {
                            z = zt;
                            t = tt;
                            accepted = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    // Precision floor reached for this τ.
                    break;
                }
            }

            let gap = nu / tau;
            if t + gap < problem.margin {
                return Ok(Feasibility::Infeasible {
                    status: SolverStatus::MarginUnattainable,
                    margin_bound: Some(t + gap),
                });
            }
            let converged = gap <= self.options.gap_tol || (t >= problem.margin && gap <= 1e-3 * t);
            if converged {
                let x = lift(&z);
                let achieved = problem.achieved_margin(&x);
                return Ok(if achieved >= problem.margin {
                    Feasibility::Feasible {
                        x,
                        achieved_margin: achieved,
                        iterations: steps,
                    }
                } else {
                    Feasibility::Infeasible {
                        status: SolverStatus::MarginUnattainable,
                        margin_bound: Some(t + gap),
                    }
                });
            }
            tau *= 10.0;
        }
    }
}
