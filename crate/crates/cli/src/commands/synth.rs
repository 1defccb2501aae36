use clap::{Args, ValueEnum};
use datared_core::data_model::write_matrix;
use datared_core::linalg::pseudo_inverse;
use datared_oracle::{full_rank_instance, invariant_instance, uncontrollable_unstable_instance, Instance, InvariantSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::report::Report;
use crate::{CliError, CommonArgs, Result, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// Data confined to a subspace made invariant by some feedback.
    Invariant,
    /// Rank-n data from a random stable system.
    FullRank,
    /// `A = 2I` with rank-n data and `U = 0`: no stabilizing member exists.
    Uncontrollable,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SynthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = Kind::Invariant)]
    pub kind: Kind,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Number of snapshots N.
    #[arg(long, default_value_t = 6)]
    pub samples: usize,
    /// Dimension of the data subspace (invariant kind).
    #[arg(long, default_value_t = 2)]
    pub subspace_dim: usize,
    /// Number of excited input directions (invariant kind).
    #[arg(long, default_value_t = 1)]
    pub excitation_dim: usize,
    /// Spectral radius of the true closed loop on the data subspace.
    #[arg(long, default_value_t = 0.9)]
    pub radius: f64,
    /// Spectral radius off the data subspace (invariant kind).
    #[arg(long, default_value_t = 0.9)]
    pub complement_radius: f64,
}

#[derive(Debug, Serialize)]
struct SynthBody {
    files: Vec<&'static str>,
    n: usize,
    m: usize,
    samples: usize,
}

const FILES: [&str; 8] = ["X.csv", "U.csv", "Xplus.csv", "sys.csv", "Bstar.csv", "Bleft.csv", "x0.csv", "xf.csv"];

fn draw(args: &SynthArgs, rng: &mut ChaCha8Rng) -> Result<Instance> {
    Ok(match args.kind {
        Kind::Invariant => invariant_instance(
            &InvariantSpec {
                n: args.n,
                m: args.m,
                s: args.subspace_dim,
                q: args.excitation_dim,
                samples: args.samples,
                radius: args.radius,
                complement_radius: args.complement_radius,
                max_reach_condition: None,
            },
            rng,
        )?,
        Kind::FullRank => full_rank_instance(args.n, args.m, args.samples, args.radius, rng)?,
        Kind::Uncontrollable => {
            if args.samples != args.n {
                return Err(CliError::Input(format!("uncontrollable data have N = n = {}", args.n)));
            }
            uncontrollable_unstable_instance(args.n, args.m, rng)?
        }
    })
}

/// Writes the snapshot triple, `[A|B]`, known input columns, `pinv(B)` and
/// two random states of the data subspace into `--data-dir`.
pub fn run(args: &SynthArgs) -> Result<Status> {
    if args.samples == 0 {
        return Err(CliError::Input("samples must be positive".into()));
    }
    if args.n == 0 || args.m == 0 {
        return Err(CliError::Input("n and m must be positive".into()));
    }
    let tols = args.common.tolerances()?;
    let seed = args.common.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = draw(args, &mut rng)?;
    let dir = &args.common.data_dir;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.clone(),
        source,
    })?;
    inst.record.write_dir(dir)?;
    inst.sys.write_csv(dir.join("sys.csv"))?;
    write_matrix(dir.join("Bstar.csv"), &inst.known_inputs)?;
    write_matrix(dir.join("Bleft.csv"), &pseudo_inverse(inst.sys.b(), 1e-12))?;
    let s = inst.subspace.ncols();
    for name in ["x0.csv", "xf.csv"] {
        let coeffs = DMatrix::from_fn(s, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        write_matrix(dir.join(name), &(&inst.subspace * coeffs))?;
    }
    let body = SynthBody {
        files: FILES.to_vec(),
        n: inst.sys.n(),
        m: inst.sys.m(),
        samples: inst.record.samples(),
    };
    Report::new("synth-data", args, Some(seed), &tols, body).write(&args.common.report_path("synth"))?;
    Ok(Status::Success)
}
