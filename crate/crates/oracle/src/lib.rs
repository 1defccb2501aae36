//! Known-`(A, B)` ground truth for the data-driven path.
//!
//! Generates snapshot records, simulates full and reduced dynamics, and checks
//! the model-based identities that the data alone cannot. Nothing in
//! `datared-core` depends on this crate.

mod campaign;
mod data;
mod error;
mod instances;
mod system;
mod verify;

pub use campaign::{run_campaign, run_trial, CampaignConfig, TrialRecord};
pub use data::{generate_data, generate_runs, ExcitationSpec, Run};
pub use error::{OracleError, Result};
pub use instances::{
    full_rank_instance, invariant_instance, random_system, uncontrollable_unstable_instance, Instance,
    InvariantSpec,
};
pub use system::{simulate_closed_loop, simulate_full, simulate_reduced, TrueSystem};
pub use verify::{verify_identities, IdentityReport};
