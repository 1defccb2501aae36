use std::path::Path;

use datared_core::data_model::{load_matrix, write_matrix};
use datared_core::linalg::numerical_rank;
use datared_core::Error;
use nalgebra::{DMatrix, DVector};

use crate::error::{OracleError, Result};

/// Rank threshold for the full-column-rank requirement on `B`.
const B_RANK_TOL: f64 = 1e-9;

/// `x(k+1) = A·x(k) + B·u(k)` with `B` of full column rank.
#[derive(Clone, Debug, PartialEq)]
pub struct TrueSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl TrueSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(OracleError::System(format!(
                "A is {}x{}, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(OracleError::System("non-finite entry".into()));
        }
        if numerical_rank(&b, B_RANK_TOL) < b.ncols() {
            return Err(OracleError::System("B must have full column rank".into()));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// `σ(M̄, N̄) = A·M̄ + B·N̄`.
    pub fn map(&self, mbar: &DMatrix<f64>, nbar: &DMatrix<f64>) -> DMatrix<f64> {
        &self.a * mbar + &self.b * nbar
    }

    /// `A + B·K`.
    pub fn closed_loop(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        &self.a + &self.b * k
    }

    /// Reads `[A | B]` from one CSV file.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let ab = load_matrix(path, None)?;
        let n = ab.nrows();
        if ab.ncols() <= n {
            return Err(Error::Dimension(format!("[A|B] has {} columns, need more than {n}", ab.ncols())).into());
        }
        Self::new(ab.columns(0, n).into_owned(), ab.columns(n, ab.ncols() - n).into_owned())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut ab = DMatrix::zeros(self.n(), self.n() + self.m());
        ab.columns_mut(0, self.n()).copy_from(&self.a);
        ab.columns_mut(self.n(), self.m()).copy_from(&self.b);
        Ok(write_matrix(path, &ab)?)
    }
}

fn check_len(what: &str, v: &DVector<f64>, n: usize) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what} has length {}, expected {n}", v.len())).into())
    }
}

/// `x(0), …, x(len(u))` under the open-loop inputs `u`.
pub fn simulate_full(sys: &TrueSystem, x0: &DVector<f64>, u: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    check_len("x0", x0, sys.n())?;
    let mut out = Vec::with_capacity(u.len() + 1);
    out.push(x0.clone());
    for uk in u {
        check_len("u(k)", uk, sys.m())?;
        let next = sys.a() * out.last().unwrap() + sys.b() * uk;
        out.push(next);
    }
    Ok(out)
}

/// Simulates `steps` steps with `u(k) = policy(k, x(k))`; returns states and inputs.
pub fn simulate_closed_loop(
    sys: &TrueSystem,
    x0: &DVector<f64>,
    steps: usize,
    mut policy: impl FnMut(usize, &DVector<f64>) -> DVector<f64>,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    check_len("x0", x0, sys.n())?;
    let mut xs = vec![x0.clone()];
    let mut us = Vec::with_capacity(steps);
    for k in 0..steps {
        let x = &xs[k];
        let u = policy(k, x);
        check_len("u(k)", &u, sys.m())?;
        xs.push(sys.a() * x + sys.b() * &u);
        us.push(u);
    }
    Ok((xs, us))
}

/// `x̄(k+1) = A_θ·x̄(k) + ū(k)`.
pub fn simulate_reduced(
    a_theta: &DMatrix<f64>,
    xbar0: &DVector<f64>,
    ubar: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let s = a_theta.nrows();
    if !a_theta.is_square() {
        return Err(Error::Dimension("A_theta must be square".into()).into());
    }
    check_len("xbar0", xbar0, s)?;
    let mut out = Vec::with_capacity(ubar.len() + 1);
    out.push(xbar0.clone());
    for uk in ubar {
        check_len("ubar(k)", uk, s)?;
        let next = a_theta * out.last().unwrap() + uk;
        out.push(next);
    }
    Ok(out)
}
