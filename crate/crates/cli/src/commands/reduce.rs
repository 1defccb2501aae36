use clap::Args;
use datared_core::reduction::ReducedModel;
use serde::Serialize;

use super::{invariant_model, load_basis};
use crate::report::{rows, Report};
use crate::{CommonArgs, Result, Status};

#[derive(Clone, Debug, Args, Serialize)]
pub struct ReduceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Serialize)]
struct Member {
    theta: Vec<Vec<f64>>,
    a_theta: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    invariance_residual: f64,
    gain_residual: f64,
}

impl From<&ReducedModel> for Member {
    fn from(m: &ReducedModel) -> Self {
        Self {
            theta: rows(&m.theta),
            a_theta: rows(&m.a_theta),
            k: rows(&m.k),
            invariance_residual: m.invariance_residual,
            gain_residual: m.gain_residual,
        }
    }
}

#[derive(Debug, Serialize)]
struct ReduceBody {
    n: usize,
    m: usize,
    samples: usize,
    s: usize,
    indices: Vec<usize>,
    #[serde(rename = "Abar")]
    abar: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    invariant: bool,
    invariance_residual: f64,
    gain_residual: f64,
    /// Invariant family member found when `θ = E` fails the test.
    relaxed: Option<Member>,
}

pub fn run(args: &ReduceArgs) -> Result<Status> {
    let tols = args.common.tolerances()?;
    let (record, basis) = load_basis(&args.common, &tols)?;
    let plain = ReducedModel::build(&record, &basis, basis.selector().clone(), None, tols.inv_tol)?;
    let relaxed = if plain.invariant {
        None
    } else {
        let found = invariant_model(&record, &basis, &tols)?;
        found.invariant.then(|| Member::from(&found))
    };
    let body = ReduceBody {
        n: record.n(),
        m: record.m(),
        samples: record.samples(),
        s: basis.order(),
        indices: basis.indices().to_vec(),
        abar: rows(&plain.a_theta),
        k: rows(&plain.k),
        invariant: plain.invariant,
        invariance_residual: plain.invariance_residual,
        gain_residual: plain.gain_residual,
        relaxed,
    };
    Report::new("reduce", args, args.common.seed, &tols, body).write(&args.common.report_path("reduce"))?;
    Ok(Status::Success)
}
