//! Reduced-order models expressed directly in snapshot data, and the two
//! controllers built on them: a stabilizing state feedback found through a
//! semidefinite feasibility search, and an `s`-step steering law.
//!
//! Everything here consumes only the snapshot triple `(X, U, X₊)` plus
//! optional user-asserted knowledge about the input matrix. Ground-truth
//! `(A, B)` lives in a separate crate that depends on this one.

pub mod data_model;
pub mod error;
pub mod linalg;
pub mod matrix_serde;
pub mod reduction;
pub mod stabilization;
pub mod steering;
mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
