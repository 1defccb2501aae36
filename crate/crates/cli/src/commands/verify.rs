use std::path::PathBuf;

use clap::Args;
use datared_oracle::{run_campaign, CampaignConfig, TrialRecord};
use serde::Serialize;

use crate::report::Report;
use crate::{CommonArgs, Result, Status};

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Campaign file (TOML); command-line values override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of trials (overrides the campaign file).
    #[arg(long)]
    pub trials: Option<usize>,
}

/// Largest value of each residual over the campaign.
#[derive(Debug, Default, Serialize)]
struct Worst {
    data_residual: f64,
    collapse_residual: f64,
    intertwining_residual: f64,
    eigen_inclusion: f64,
    lift_round_trip: f64,
    projection_residual: f64,
}

#[derive(Debug, Serialize)]
struct VerifyBody {
    campaign: CampaignConfig,
    trials: usize,
    passed: usize,
    all_hold: bool,
    worst: Worst,
    records: Vec<TrialRecord>,
}

/// Runs the campaign; failed identities are reported (`all_hold = false`),
/// not turned into an exit code.
pub fn run(args: &VerifyArgs) -> Result<Status> {
    let mut campaign = match &args.config {
        Some(path) => CampaignConfig::load(path)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = args.common.seed {
        campaign.seed = seed;
    }
    if let Some(trials) = args.trials {
        campaign.trials = trials;
    }
    campaign.tolerances = args.common.tolerances_over(campaign.tolerances.clone())?;
    let records = run_campaign(&campaign)?;
    let mut worst = Worst::default();
    for r in &records {
        let id = &r.identities;
        worst.data_residual = worst.data_residual.max(id.data_residual);
        worst.collapse_residual = worst.collapse_residual.max(id.collapse_residual);
        worst.intertwining_residual = worst.intertwining_residual.max(id.intertwining_residual);
        worst.eigen_inclusion = worst.eigen_inclusion.max(id.eigen_inclusion);
        worst.lift_round_trip = worst.lift_round_trip.max(id.lift_round_trip);
        worst.projection_residual = worst.projection_residual.max(id.projection_residual);
    }
    let passed = records.iter().filter(|r| r.identities.holds()).count();
    let tols = campaign.tolerances.clone();
    let body = VerifyBody {
        trials: records.len(),
        all_hold: passed == records.len(),
        passed,
        worst,
        records,
        campaign: campaign.clone(),
    };
    Report::new("verify", args, Some(campaign.seed), &tols, body).write(&args.common.report_path("verify"))?;
    Ok(Status::Success)
}
