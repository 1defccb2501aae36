use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds used along the pipeline; every report echoes them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular-value threshold for numerical rank.
    pub rank_tol: f64,
    /// Relative tolerance of the `im(X₊θ) ⊆ 𝒳` test.
    pub inv_tol: f64,
    /// Margin replacing strict LMI inequalities.
    pub lmi_margin: f64,
    /// Relative tolerance for subspace membership of states and input directions.
    pub subspace_tol: f64,
    /// Relative singular-value threshold of the reachability rank test.
    pub reach_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            inv_tol: 1e-7,
            lmi_margin: 1e-8,
            subspace_tol: 1e-8,
            reach_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rank_tol", self.rank_tol),
            ("inv_tol", self.inv_tol),
            ("lmi_margin", self.lmi_margin),
            ("subspace_tol", self.subspace_tol),
            ("reach_tol", self.reach_tol),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parameter(format!("{name} must be positive, got {value}")));
            }
        }
        if self.rank_tol >= 1.0 {
            return Err(Error::Parameter("rank_tol must be below 1".into()));
        }
        Ok(())
    }
}
