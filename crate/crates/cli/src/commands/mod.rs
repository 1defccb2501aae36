//! One module per subcommand; each writes a report and returns a [`Status`](crate::Status).

pub mod reduce;
pub mod stabilize;
pub mod steer;
pub mod synth;
pub mod verify;

use datared_core::data_model::{select_basis, BasisSelection, SnapshotRecord};
use datared_core::reduction::{find_invariant_theta, ReducedModel};
use datared_core::Tolerances;

use crate::error::Result;
use crate::CommonArgs;

pub(crate) fn load_basis(common: &CommonArgs, tols: &Tolerances) -> Result<(SnapshotRecord, BasisSelection)> {
    let record = SnapshotRecord::load_dir(&common.data_dir)?;
    let basis = select_basis(&record, tols.rank_tol)?;
    Ok((record, basis))
}

/// The `θ = E` model, replaced by the least-norm invariant family member
/// when `θ = E` fails the test and such a member exists.
pub(crate) fn invariant_model(
    record: &SnapshotRecord,
    basis: &BasisSelection,
    tols: &Tolerances,
) -> Result<ReducedModel> {
    let plain = ReducedModel::build(record, basis, basis.selector().clone(), None, tols.inv_tol)?;
    if plain.invariant {
        return Ok(plain);
    }
    match find_invariant_theta(record, basis, tols.inv_tol)? {
        Some(theta) => Ok(ReducedModel::build(record, basis, theta, None, tols.inv_tol)?),
        None => Ok(plain),
    }
}
