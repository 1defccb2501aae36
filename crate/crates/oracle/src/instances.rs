//! Seeded random systems and engineered data sets with known structure.

use datared_core::data_model::SnapshotRecord;
use datared_core::linalg::{numerical_rank, singular_values};
use datared_core::stabilization::spectral_radius;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{gaussian, generate_runs, Run};
use crate::error::{OracleError, Result};
use crate::system::TrueSystem;

const MAX_REDRAWS: usize = 1000;

/// A true system, data generated from it, and the structure it was built with.
#[derive(Clone, Debug)]
pub struct Instance {
    pub sys: TrueSystem,
    pub record: SnapshotRecord,
    /// Orthonormal basis of the subspace the data was confined to.
    pub subspace: DMatrix<f64>,
    /// Columns known to lie in `im B ∩ subspace`.
    pub known_inputs: DMatrix<f64>,
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn scaled_to_radius(m: DMatrix<f64>, radius: f64) -> Option<DMatrix<f64>> {
    let rho = spectral_radius(&m).ok()?;
    (rho > 1e-3).then(|| m * (radius / rho))
}

fn random_square(n: usize, radius: f64, rng: &mut impl Rng) -> Result<DMatrix<f64>> {
    for _ in 0..MAX_REDRAWS {
        if let Some(m) = scaled_to_radius(gaussian_matrix(n, n, rng), radius) {
            return Ok(m);
        }
    }
    Err(OracleError::System("could not draw a matrix with nonzero spectrum".into()))
}

fn well_conditioned_columns(rows: usize, cols: usize, rng: &mut impl Rng) -> Result<DMatrix<f64>> {
    for _ in 0..MAX_REDRAWS {
        let b = gaussian_matrix(rows, cols, rng);
        if numerical_rank(&b, 1e-3) == cols {
            return Ok(b);
        }
    }
    Err(OracleError::System("could not draw a full-column-rank matrix".into()))
}

fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    gaussian_matrix(n, n, rng).qr().q()
}

/// `A` Gaussian, rescaled to spectral radius `radius`; `B` redrawn until
/// comfortably of full column rank.
pub fn random_system(n: usize, m: usize, radius: f64, rng: &mut impl Rng) -> Result<TrueSystem> {
    if n == 0 || m == 0 || m > n {
        return Err(OracleError::System(format!("need 1 <= m <= n, got n={n}, m={m}")));
    }
    let a = random_square(n, radius, rng)?;
    let b = well_conditioned_columns(n, m, rng)?;
    TrueSystem::new(a, b)
}

/// Shape of an engineered instance whose data lives in an `s`-dimensional
/// subspace `𝒮` that some feedback renders invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSpec {
    pub n: usize,
    pub m: usize,
    /// `dim 𝒮`.
    pub s: usize,
    /// Number of excited input directions; `im(B·Q) ⊆ 𝒮`.
    pub q: usize,
    /// Total snapshots; at least `s`.
    pub samples: usize,
    /// Spectral radius of the closed loop restricted to `𝒮`.
    pub radius: f64,
    /// Spectral radius of the block `M₂₂` acting off `𝒮`. Data never excite
    /// it, so no data-driven gain can move it.
    pub complement_radius: f64,
    /// Require `(M₁₁, B₁Q)` reachable with reachability matrix condition
    /// number below this bound.
    pub max_reach_condition: Option<f64>,
}

/// Builds `A_cl = T·[[M₁₁, M₁₂], [0, M₂₂]]·Tᵀ`, `B = T·[B₁; B₂]` with the
/// first `q` columns of `B₂` zero, and `A = A_cl − B·F` for a random `F`
/// supported on `𝒮`.
///
/// The first `s` snapshots are single steps from random `x ∈ 𝒮` under
/// `u = F·x`, so `θ = E` yields `A_θ ∼ M₁₁`. The remaining snapshots form
/// one run under `u = F·x + Q·η`; they stay in `𝒮` and give `ker X` directions
/// with `X₊w ∈ im(BQ)`.
pub fn invariant_instance(spec: &InvariantSpec, rng: &mut impl Rng) -> Result<Instance> {
    let InvariantSpec { n, m, s, q, samples, .. } = *spec;
    if s == 0 || s > n || q == 0 || q > m.min(s) || samples < s {
        return Err(OracleError::System(format!(
            "invalid shape n={n}, m={m}, s={s}, q={q}, samples={samples}"
        )));
    }
    let r = n - s;
    for _ in 0..MAX_REDRAWS {
        let t = random_orthogonal(n, rng);
        let ts = t.columns(0, s).into_owned();
        let m11 = random_square(s, spec.radius, rng)?;
        let mut core = DMatrix::zeros(n, n);
        core.view_mut((0, 0), (s, s)).copy_from(&m11);
        if r > 0 {
            core.view_mut((0, s), (s, r)).copy_from(&(gaussian_matrix(s, r, rng) * 0.5));
            core.view_mut((s, s), (r, r)).copy_from(&random_square(r, spec.complement_radius, rng)?);
        }
        let a_cl = &t * core * t.transpose();
        let mut b_local = gaussian_matrix(n, m, rng);
        b_local.view_mut((s, 0), (r, q)).fill(0.0);
        let b = &t * &b_local;
        if numerical_rank(&b, 1e-3) < m {
            continue;
        }
        if let Some(bound) = spec.max_reach_condition {
            let b1q = b_local.view((0, 0), (s, q)).into_owned();
            if !reach_well_conditioned(&m11, &b1q, bound) {
                continue;
            }
        }
        // F acts on 𝒮 only, so the closed loop off 𝒮 stays M₂₂ and rounding
        // errors leaving 𝒳 grow no faster than its spectral radius.
        let f = gaussian_matrix(m, s, rng) * 0.5 * ts.transpose();
        let a = &a_cl - &b * &f;
        let sys = TrueSystem::new(a, b.clone())?;
        let qsel = DMatrix::<f64>::identity(m, q);

        let mut runs = Vec::with_capacity(s + 1);
        for _ in 0..s {
            let x0 = &ts * gaussian(s, rng);
            let u0 = &f * &x0;
            runs.push(Run { x0, inputs: vec![u0] });
        }
        if samples > s {
            let x0 = &ts * gaussian(s, rng);
            let mut x = x0.clone();
            let mut inputs = Vec::with_capacity(samples - s);
            for _ in s..samples {
                let uk: DVector<f64> = &f * &x + &qsel * gaussian(q, rng);
                x = sys.a() * &x + sys.b() * &uk;
                inputs.push(uk);
            }
            runs.push(Run { x0, inputs });
        }
        let record = generate_runs(&sys, &runs)?;
        if numerical_rank(record.x(), 1e-6) != s {
            continue;
        }
        return Ok(Instance {
            known_inputs: &b * qsel,
            sys,
            record,
            subspace: ts,
        });
    }
    Err(OracleError::System("could not draw an invariant instance".into()))
}

fn reach_well_conditioned(a: &DMatrix<f64>, w: &DMatrix<f64>, bound: f64) -> bool {
    let s = a.nrows();
    let q = w.ncols();
    let mut r = DMatrix::zeros(s, s * q);
    let mut p = w.clone();
    for k in 0..s {
        r.columns_mut(k * q, q).copy_from(&p);
        p = a * p;
    }
    let sigma = singular_values(&r);
    let (smax, smin) = (sigma[0], sigma[s - 1]);
    smin > 0.0 && smax / smin < bound
}

/// Rank-`n` data from independent single steps with random states and inputs.
pub fn full_rank_instance(n: usize, m: usize, samples: usize, radius: f64, rng: &mut impl Rng) -> Result<Instance> {
    if samples < n {
        return Err(OracleError::System(format!("need at least n={n} samples, got {samples}")));
    }
    let sys = random_system(n, m, radius, rng)?;
    for _ in 0..MAX_REDRAWS {
        let runs: Vec<Run> = (0..samples)
            .map(|_| Run {
                x0: gaussian(n, rng),
                inputs: vec![gaussian(m, rng)],
            })
            .collect();
        let record = generate_runs(&sys, &runs)?;
        if numerical_rank(record.x(), 1e-3) == n {
            return Ok(Instance {
                known_inputs: sys.b().clone(),
                subspace: DMatrix::identity(n, n),
                sys,
                record,
            });
        }
    }
    Err(OracleError::System("could not draw rank-n data".into()))
}

/// `A = 2·I`, random `B`, rank-`n` square data with `U = 0`: every member of
/// the reduced family is similar to `2·I`.
pub fn uncontrollable_unstable_instance(n: usize, m: usize, rng: &mut impl Rng) -> Result<Instance> {
    let b = well_conditioned_columns(n, m, rng)?;
    let sys = TrueSystem::new(DMatrix::identity(n, n) * 2.0, b)?;
    for _ in 0..MAX_REDRAWS {
        let runs: Vec<Run> = (0..n)
            .map(|_| Run {
                x0: gaussian(n, rng),
                inputs: vec![DVector::zeros(m)],
            })
            .collect();
        let record = generate_runs(&sys, &runs)?;
        if numerical_rank(record.x(), 1e-3) == n {
            return Ok(Instance {
                known_inputs: sys.b().clone(),
                subspace: DMatrix::identity(n, n),
                sys,
                record,
            });
        }
    }
    Err(OracleError::System("could not draw rank-n data".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use datared_core::data_model::{select_basis, subspace_contains, SubspaceBasis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_system_has_requested_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = random_system(5, 2, 0.8, &mut rng).unwrap();
        assert!((spectral_radius(sys.a()).unwrap() - 0.8).abs() < 1e-9);
        assert_eq!(sys.m(), 2);
    }

    #[test]
    fn invariant_instance_data_stays_in_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = InvariantSpec {
            n: 6,
            m: 2,
            s: 3,
            q: 1,
            samples: 9,
            radius: 0.9,
            complement_radius: 1.1,
            max_reach_condition: None,
        };
        let inst = invariant_instance(&spec, &mut rng).unwrap();
        let basis = select_basis(&inst.record, 1e-9).unwrap();
        assert_eq!(basis.order(), 3);
        assert_eq!(basis.indices(), &[0, 1, 2]);
        let sub = SubspaceBasis::span(&inst.subspace, 1e-10);
        assert!(subspace_contains(&sub, inst.record.xplus(), 1e-10).unwrap().contained);
        assert!(subspace_contains(&sub, &inst.known_inputs, 1e-10).unwrap().contained);
    }

    #[test]
    fn unstable_family_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = uncontrollable_unstable_instance(3, 1, &mut rng).unwrap();
        assert!((inst.record.xplus() - inst.record.x() * 2.0).norm() < 1e-12);
        assert_eq!(inst.record.u().norm(), 0.0);
    }
}
