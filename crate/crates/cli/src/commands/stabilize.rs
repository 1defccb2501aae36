use std::time::Duration;

use clap::Args;
use datared_core::stabilization::sdp::{BarrierOptions, BarrierSolver};
use datared_core::stabilization::{stabilize, StabilizationCertificate, StabilizationOutcome, StabilizeOptions};
use serde::Serialize;

use super::load_basis;
use crate::report::Report;
use crate::{CliError, CommonArgs, Result, Status};

#[derive(Clone, Debug, Args, Serialize)]
pub struct StabilizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Wall-clock budget of each LMI solve, in seconds.
    #[arg(long)]
    pub deadline: Option<f64>,
    /// Bisection steps on the contraction factor after feasibility.
    #[arg(long, default_value_t = StabilizeOptions::default().contraction_steps)]
    pub contraction_steps: usize,
}

#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum StabilizeBody {
    Certified {
        #[serde(flatten)]
        certificate: Box<StabilizationCertificate>,
    },
    Infeasible {
        solver_status: &'static str,
        margin_bound: Option<f64>,
    },
}

pub fn run(args: &StabilizeArgs) -> Result<Status> {
    let tols = args.common.tolerances()?;
    let deadline = match args.deadline {
        None => None,
        Some(d) if d.is_finite() && d >= 0.0 => Some(Duration::from_secs_f64(d)),
        Some(d) => return Err(CliError::Input(format!("deadline must be a non-negative number of seconds, got {d}"))),
    };
    let (record, basis) = load_basis(&args.common, &tols)?;
    let solver = BarrierSolver::new(BarrierOptions {
        deadline,
        ..BarrierOptions::default()
    });
    let options = StabilizeOptions {
        margin: tols.lmi_margin,
        inv_tol: tols.inv_tol,
        contraction_steps: args.contraction_steps,
    };
    let (body, status) = match stabilize(&record, &basis, &options, &solver)? {
        StabilizationOutcome::Certified(certificate) => (StabilizeBody::Certified { certificate }, Status::Success),
        StabilizationOutcome::Infeasible { status, margin_bound } => (
            StabilizeBody::Infeasible {
                solver_status: status.as_str(),
                margin_bound,
            },
            Status::Infeasible,
        ),
    };
    Report::new("stabilize", args, args.common.seed, &tols, body).write(&args.common.report_path("stabilize"))?;
    Ok(status)
}
