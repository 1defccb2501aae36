use nalgebra::DMatrix;

use super::{left_inverse_tol, SnapshotRecord, SubspaceBasis};
use crate::error::{Error, Result};
use crate::linalg::{full_svd, rank_from_sigma};

/// A set of `s = rank X` independent snapshot columns and everything derived
/// from that choice: `X̄`, `Ū`, the 0/1 selector `E` and the left inverse `X̄ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSelection {
    xbar: DMatrix<f64>,
    ubar: DMatrix<f64>,
    xbar_left: DMatrix<f64>,
    selector: DMatrix<f64>,
    indices: Vec<usize>,
    rank_tol: f64,
}

impl BasisSelection {
    /// Builds the selection for explicit column indices; fails with a rank
    /// error when the chosen columns are dependent at `rank_tol`.
    pub fn from_indices(record: &SnapshotRecord, indices: &[usize], rank_tol: f64) -> Result<Self> {
        let samples = record.samples();
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() || indices.is_empty() {
            return Err(Error::Parameter("indices must be distinct and non-empty".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= samples) {
            return Err(Error::Parameter(format!("index {bad} out of range 0..{samples}")));
        }
        let s = indices.len();
        let mut selector = DMatrix::zeros(samples, s);
        for (j, &i) in indices.iter().enumerate() {
            selector[(i, j)] = 1.0;
        }
        let xbar = record.x().select_columns(indices);
        let ubar = record.u().select_columns(indices);
        let xbar_left = left_inverse_tol(&xbar, rank_tol)?;
        Ok(Self {
            xbar,
            ubar,
            xbar_left,
            selector,
            indices: indices.to_vec(),
            rank_tol,
        })
    }

    /// `X̄`, `n × s`.
    pub fn xbar(&self) -> &DMatrix<f64> {
        &self.xbar
    }

    /// `Ū = U·E`, `m × s`.
    pub fn ubar(&self) -> &DMatrix<f64> {
        &self.ubar
    }

    /// The pseudoinverse `X̄ℓ`, `s × n`.
    pub fn xbar_left(&self) -> &DMatrix<f64> {
        &self.xbar_left
    }

    /// `E`, `N × s`.
    pub fn selector(&self) -> &DMatrix<f64> {
        &self.selector
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// The data subspace `𝒳 = im X̄` as an orthonormal basis.
    pub fn data_subspace(&self) -> SubspaceBasis {
        SubspaceBasis::span(&self.xbar, self.rank_tol)
    }
}

/// Picks the lexicographically smallest set of column indices whose columns
/// reach the numerical rank of `X`.
///
/// Columns are scanned left to right and kept when they raise the numerical
/// rank of the kept set; the threshold is `rank_tol · σ_max(X)` throughout,
/// so the scan stops exactly at `s = rank X`.
pub fn select_basis(record: &SnapshotRecord, rank_tol: f64) -> Result<BasisSelection> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::Parameter(format!("rank_tol must lie in (0, 1), got {rank_tol}")));
    }
    let x = record.x();
    let svd = full_svd(x);
    let s = rank_from_sigma(&svd.sigma, rank_tol);
    if s == 0 {
        return Err(Error::DegenerateData(
            "state snapshots are zero; the data subspace is empty".into(),
        ));
    }
    let threshold = rank_tol * svd.sigma[0];
    let mut chosen: Vec<usize> = Vec::with_capacity(s);
    for j in 0..record.samples() {
        if chosen.len() == s {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(j);
        let sub = x.select_columns(&trial);
        let sigma = full_svd(&sub).sigma;
        if sigma.iter().filter(|&&v| v >= threshold).count() == trial.len() {
            chosen = trial;
        }
    }
    if chosen.len() < s {
        return Err(Error::Rank(format!(
            "greedy scan found {} independent columns but rank X = {s}",
            chosen.len()
        )));
    }
    BasisSelection::from_indices(record, &chosen, rank_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::{subspace_contains, validate_snapshots};
    use proptest::prelude::*;

    fn record(x: DMatrix<f64>, u: DMatrix<f64>) -> SnapshotRecord {
        let xp = DMatrix::zeros(x.nrows(), x.ncols());
        validate_snapshots(x, u, xp).unwrap()
    }

    /// Enumerates subsets in lexicographic order and returns the first one
    /// of maximal rank.
    fn brute_force_indices(x: &DMatrix<f64>, tol: f64) -> Vec<usize> {
        let n = x.ncols();
        let rank = crate::linalg::numerical_rank(x, tol);
        let mut best: Option<Vec<usize>> = None;
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if idx.len() != rank {
                continue;
            }
            let sub = x.select_columns(&idx);
            let sigma = full_svd(&sub).sigma;
            let ok = sigma.iter().filter(|&&v| v >= tol * full_svd(x).sigma[0]).count() == rank;
            if ok && best.as_ref().is_none_or(|b| idx < *b) {
                best = Some(idx);
            }
        }
        best.unwrap()
    }

    #[test]
    fn rank_one_picks_first_column() {
        let r = record(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 0.0]),
            DMatrix::from_row_slice(1, 2, &[3.0, 4.0]),
        );
        let b = select_basis(&r, 1e-9).unwrap();
        assert_eq!(b.indices(), &[0]);
        assert_eq!(b.xbar(), &DMatrix::from_row_slice(2, 1, &[1.0, 0.0]));
        assert_eq!(b.ubar(), &DMatrix::from_row_slice(1, 1, &[3.0]));
        assert_eq!(brute_force_indices(r.x(), 1e-9), vec![0]);
    }

    #[test]
    fn identity_data() {
        let r = record(DMatrix::identity(2, 2), DMatrix::zeros(1, 2));
        let b = select_basis(&r, 1e-9).unwrap();
        assert_eq!(b.order(), 2);
        assert_eq!(b.selector(), &DMatrix::identity(2, 2));
        assert_eq!(b.xbar(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn zero_data_is_degenerate() {
        let r = record(DMatrix::zeros(2, 2), DMatrix::zeros(1, 2));
        assert!(matches!(select_basis(&r, 1e-9), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn tolerance_out_of_range() {
        let r = record(DMatrix::identity(2, 2), DMatrix::zeros(1, 2));
        assert!(matches!(select_basis(&r, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(select_basis(&r, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn dependent_explicit_indices_are_rank_errors() {
        let r = record(
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 0.0]),
            DMatrix::zeros(1, 2),
        );
        assert!(matches!(
            BasisSelection::from_indices(&r, &[0, 1], 1e-9),
            Err(Error::Rank(_))
        ));
    }

    #[test]
    fn leading_zero_column_is_skipped() {
        let r = record(
            DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 1.0, 0.0, 1.0, 0.0]),
            DMatrix::zeros(1, 3),
        );
        assert_eq!(select_basis(&r, 1e-9).unwrap().indices(), &[1, 2]);
    }

    proptest! {
        #[test]
        fn selection_matches_brute_force_and_invariants(
            n in 1usize..5, cols in 1usize..7, rank in 1usize..4, seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rank = rank.min(n).min(cols);
            let left = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.0..1.0));
            let right = DMatrix::from_fn(rank, cols, |_, _| {
                // Integer-ish mixing with occasional zero columns.
                if rng.random_bool(0.2) { 0.0 } else { rng.random_range(-2.0..2.0) }
            });
            let x = left * right;
            let u = DMatrix::from_fn(2, cols, |_, _| rng.random_range(-1.0..1.0));
            let r = record(x.clone(), u.clone());
            match select_basis(&r, 1e-9) {
                Err(Error::DegenerateData(_)) => prop_assert_eq!(crate::linalg::numerical_rank(&x, 1e-9), 0),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
                Ok(b) => {
                    prop_assert_eq!(b.indices().to_vec(), brute_force_indices(&x, 1e-9));
                    prop_assert_eq!(&(r.x() * b.selector()), b.xbar());
                    prop_assert_eq!(&(r.u() * b.selector()), b.ubar());
                    let eye = DMatrix::<f64>::identity(b.order(), b.order());
                    prop_assert!((b.xbar_left() * b.xbar() - eye).norm() <= 1e-10 * (1.0 + b.xbar().norm() * b.xbar_left().norm()));
                    let span_x = SubspaceBasis::span(r.x(), 1e-9);
                    prop_assert!(subspace_contains(&span_x, b.xbar(), 1e-8).unwrap().contained);
                    let again = select_basis(&r, 1e-9).unwrap();
                    prop_assert_eq!(again.indices(), b.indices());
                }
            }
        }
    }
}
