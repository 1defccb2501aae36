use datared_core::data_model::{validate_snapshots, SnapshotRecord};
use datared_core::Error;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::system::{simulate_full, TrueSystem};

/// One experiment: initial state and open-loop input sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub x0: DVector<f64>,
    pub inputs: Vec<DVector<f64>>,
}

/// Single run: `X = [x(0..N−1)]`, `U = [u(0..N−1)]`, `X₊ = [x(1..N)]`.
pub fn generate_data(sys: &TrueSystem, x0: &DVector<f64>, u: &[DVector<f64>]) -> Result<SnapshotRecord> {
    generate_runs(
        sys,
        &[Run {
            x0: x0.clone(),
            inputs: u.to_vec(),
        }],
    )
}

/// Concatenates the snapshots of several runs column-wise.
pub fn generate_runs(sys: &TrueSystem, runs: &[Run]) -> Result<SnapshotRecord> {
    let total: usize = runs.iter().map(|r| r.inputs.len()).sum();
    if total == 0 {
        return Err(Error::Dimension("no snapshots: every run is empty".into()).into());
    }
    let (n, m) = (sys.n(), sys.m());
    let mut x = DMatrix::zeros(n, total);
    let mut u = DMatrix::zeros(m, total);
    let mut xplus = DMatrix::zeros(n, total);
    let mut col = 0;
    for run in runs {
        let states = simulate_full(sys, &run.x0, &run.inputs)?;
        for (k, uk) in run.inputs.iter().enumerate() {
            x.set_column(col, &states[k]);
            u.set_column(col, uk);
            xplus.set_column(col, &states[k + 1]);
            col += 1;
        }
    }
    Ok(validate_snapshots(x, u, xplus)?)
}

/// Random excitation `u(k) = F·x(k) + Q·η(k)` with `η(k)` standard normal.
///
/// Restricting `Q` (and the initial states) to subspaces produces
/// deliberately rank-deficient data.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationSpec {
    /// Total number of snapshots `N`.
    pub samples: usize,
    /// Snapshots per run; runs restart from a fresh random initial state.
    pub run_length: usize,
    /// `F` (`m × n`); zero when absent.
    pub feedback: Option<DMatrix<f64>>,
    /// `Q` (`m × q`); identity when absent.
    pub input_basis: Option<DMatrix<f64>>,
    /// Initial states are drawn in the span of these columns; `ℝⁿ` when absent.
    pub initial_basis: Option<DMatrix<f64>>,
    pub input_scale: f64,
}

impl ExcitationSpec {
    pub fn new(samples: usize) -> Self {
        Self {
            samples,
            run_length: samples.max(1),
            feedback: None,
            input_basis: None,
            initial_basis: None,
            input_scale: 1.0,
        }
    }

    pub fn generate(&self, sys: &TrueSystem, rng: &mut impl Rng) -> Result<SnapshotRecord> {
        let (n, m) = (sys.n(), sys.m());
        let q = self.input_basis.as_ref().map_or(m, |b| b.ncols());
        let feedback = self.feedback.clone().unwrap_or_else(|| DMatrix::zeros(m, n));
        let mut runs = Vec::new();
        let mut left = self.samples;
        while left > 0 {
            let len = left.min(self.run_length.max(1));
            left -= len;
            let x0 = match &self.initial_basis {
                Some(basis) => basis * gaussian(basis.ncols(), rng),
                None => gaussian(n, rng),
            };
            // Inputs depend on the state, so simulate while drawing.
            let mut x = x0.clone();
            let mut inputs = Vec::with_capacity(len);
            for _ in 0..len {
                let eta = gaussian(q, rng) * self.input_scale;
                let drive = match &self.input_basis {
                    Some(basis) => basis * eta,
                    None => eta,
                };
                let uk = &feedback * &x + drive;
                x = sys.a() * &x + sys.b() * &uk;
                inputs.push(uk);
            }
            runs.push(Run { x0, inputs });
        }
        generate_runs(sys, &runs)
    }
}

pub(crate) fn gaussian(len: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use datared_core::linalg::numerical_rank;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_column_record() {
        let sys = TrueSystem::new(DMatrix::identity(2, 2), DMatrix::identity(2, 1)).unwrap();
        let rec = generate_data(&sys, &DVector::from_element(2, 1.0), &[DVector::from_element(1, 2.0)]).unwrap();
        assert_eq!(rec.samples(), 1);
        assert_eq!(rec.xplus().column(0).as_slice(), &[3.0, 1.0]);
    }

    #[test]
    fn empty_data_is_rejected() {
        let sys = TrueSystem::new(DMatrix::identity(2, 2), DMatrix::identity(2, 1)).unwrap();
        assert!(generate_data(&sys, &DVector::zeros(2), &[]).is_err());
    }

    #[test]
    fn restricted_inputs_confine_successors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.4);
        let sys = TrueSystem::new(a.clone(), DMatrix::identity(3, 3)).unwrap();
        let mut spec = ExcitationSpec::new(6);
        spec.input_basis = Some(DMatrix::identity(3, 1));
        let rec = spec.generate(&sys, &mut rng).unwrap();
        // im X₊ ⊆ A·𝒳 + span{e₁}.
        let mut span = DMatrix::zeros(3, 7);
        span.columns_mut(0, 6).copy_from(&(&a * rec.x()));
        span[(0, 6)] = 1.0;
        let r = numerical_rank(&span, 1e-10);
        let mut with = DMatrix::zeros(3, 13);
        with.columns_mut(0, 7).copy_from(&span);
        with.columns_mut(7, 6).copy_from(rec.xplus());
        assert_eq!(numerical_rank(&with, 1e-10), r);
    }

    #[test]
    fn rich_excitation_reaches_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(4, 4, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.3);
        let b = DMatrix::from_fn(4, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sys = TrueSystem::new(a, b).unwrap();
        let rec = ExcitationSpec::new(8).generate(&sys, &mut rng).unwrap();
        let mut xu = DMatrix::zeros(6, 8);
        xu.rows_mut(0, 4).copy_from(rec.x());
        xu.rows_mut(4, 2).copy_from(rec.u());
        assert_eq!(numerical_rank(&xu, 1e-9), 6);
    }
}
