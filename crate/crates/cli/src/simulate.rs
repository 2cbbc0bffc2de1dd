use std::path::PathBuf;

use affdim::fields::{simulate_ofbm, simulate_stable_levy, FieldPath};
use affdim::report::Report;
use affdim::{Error, SquareMatrix};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::input::{emit, matrix, path_file};
use crate::Outcome;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    /// Operator fractional Brownian motion (Gaussian), E = I_d.
    Ofbm,
    /// Lévy process with independent symmetric stable coordinates.
    Levy,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Hurst indices; D = diag(H) (ofbm).
    #[arg(long = "H", value_delimiter = ',', conflicts_with = "d_matrix")]
    h: Vec<f64>,
    /// Exponent matrix D (ofbm), file or inline.
    #[arg(long = "D", id = "d_matrix", allow_hyphen_values = true)]
    d_matrix: Option<String>,
    /// Parameter dimension (ofbm: 1 or 2).
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Stability indices, one per coordinate (levy).
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Lattice points per axis.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for path CSVs and the run report.
    #[arg(long, default_value = "paths")]
    dir: PathBuf,
}

pub fn run(a: Args) -> Outcome {
    if a.replicas == 0 {
        return Err(Error::Input("at least one replica is needed".into()).into());
    }
    let mut report = Report::new();
    let paths: Vec<FieldPath> = match a.model {
        ModelArg::Ofbm => {
            let exponent = match (&a.d_matrix, a.h.is_empty()) {
                (Some(m), _) => matrix(m)?,
                (None, false) => SquareMatrix::diagonal(&a.h)?,
                (None, true) => return Err(Error::Input("ofbm needs --H or --D".into()).into()),
            };
            report.root().str("model", "ofbm").floats("exponent", &exponent.to_row_major());
            simulate_ofbm(&exponent, a.d, a.n, a.replicas, a.seed)?
        }
        ModelArg::Levy => {
            if a.alpha.is_empty() {
                return Err(Error::Input("levy needs --alpha".into()).into());
            }
            if a.d != 1 {
                return Err(Error::Unsupported("Lévy processes have d = 1".into()).into());
            }
            report.root().str("model", "levy").floats("alphas", &a.alpha);
            simulate_stable_levy(&a.alpha, a.n, a.replicas, a.seed)?
        }
    };
    std::fs::create_dir_all(&a.dir)?;
    paths.par_iter().enumerate().map(|(i, p)| p.write(&path_file(&a.dir, i))).collect::<affdim::Result<()>>()?;
    let first = &paths[0];
    report
        .root()
        .int("d", first.d as i64)
        .int("m", first.m as i64)
        .int("n", first.n as i64)
        .int("replicas", paths.len() as i64)
        .str("seed", a.seed.to_string());
    emit(&report, &a.dir.join("simulate.toml"))?;
    Ok(())
}
