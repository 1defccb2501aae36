use std::path::PathBuf;

use clap::Args;
use datared_core::data_model::load_matrix;
use datared_core::steering::{synthesize_plan, InputKnowledge, SteeringPlan};
use datared_oracle::{simulate_closed_loop, TrueSystem};
use serde::Serialize;

use super::{invariant_model, load_basis};
use crate::report::{load_vector, rows, vectors, Report};
use crate::{CliError, CommonArgs, Result, Status};

#[derive(Clone, Debug, Args, Serialize)]
pub struct SteerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Initial state (CSV row or column, length n).
    #[arg(long)]
    pub x0: PathBuf,
    /// Target state (CSV row or column, length n).
    #[arg(long)]
    pub xf: PathBuf,
    /// Columns known to lie in im B (n × p CSV).
    #[arg(long)]
    pub bstar: Option<PathBuf>,
    /// A left inverse of B (m × n CSV); needed to realize the inputs.
    #[arg(long)]
    pub bleft: Option<PathBuf>,
    /// Ground-truth [A|B] CSV; runs the plan and records the endpoint residual.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    /// Solve for unrestricted reduced inputs and test their membership instead.
    #[arg(long)]
    pub direct_solve: bool,
}

#[derive(Debug, Serialize)]
struct Simulation {
    /// `x(0), …, x(s)`.
    states: Vec<Vec<f64>>,
    /// `u(0), …, u(s−1)`.
    inputs: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct SteerBody {
    s: usize,
    theta: Vec<Vec<f64>>,
    a_theta: Vec<Vec<f64>>,
    invariance_residual: f64,
    x0: Vec<f64>,
    xf: Vec<f64>,
    plan: SteeringPlan,
    simulation: Option<Simulation>,
}

pub fn run(args: &SteerArgs) -> Result<Status> {
    let tols = args.common.tolerances()?;
    let (record, basis) = load_basis(&args.common, &tols)?;
    let (n, m) = (record.n(), record.m());
    let x0 = load_vector(&args.x0, n)?;
    let xf = load_vector(&args.xf, n)?;
    let mut knowledge = InputKnowledge::from_data(&record, tols.rank_tol)?;
    if let Some(path) = &args.bstar {
        knowledge = knowledge.with_bstar(load_matrix(path, Some(n))?);
    }
    if let Some(path) = &args.bleft {
        knowledge = knowledge.with_bleft(load_matrix(path, Some(m))?);
    }
    let oracle = args.oracle.as_ref().map(TrueSystem::load_csv).transpose()?;
    if let Some(sys) = &oracle {
        if (sys.n(), sys.m()) != (n, m) {
            return Err(CliError::Input(format!(
                "oracle system is {}x{} but the data have n={n}, m={m}",
                sys.n(),
                sys.m()
            )));
        }
    }
    let model = invariant_model(&record, &basis, &tols)?;
    let mut plan = synthesize_plan(&record, &basis, &model, &knowledge, &x0, &xf, &tols, args.direct_solve)?;
    let simulation = match &oracle {
        Some(sys) => {
            let (xs, us) = simulate_closed_loop(sys, &x0, plan.horizon, |k, x| plan.input(k, x))?;
            let residual = (&xs[plan.horizon] - &xf).norm();
            plan.endpoint_residual = Some(residual);
            Some(Simulation {
                states: vectors(&xs),
                inputs: vectors(&us),
            })
        }
        None => None,
    };
    let body = SteerBody {
        s: basis.order(),
        theta: rows(&model.theta),
        a_theta: rows(&model.a_theta),
        invariance_residual: model.invariance_residual,
        x0: x0.iter().copied().collect(),
        xf: xf.iter().copied().collect(),
        plan,
        simulation,
    };
    Report::new("steer", args, args.common.seed, &tols, body).write(&args.common.report_path("steer"))?;
    Ok(Status::Success)
}
