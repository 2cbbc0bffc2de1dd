use std::path::PathBuf;

use affdim::fields::verify_scaling;
use affdim::matrix::spectrum_summary;
use affdim::occupation::Kind;
use affdim::report::Report;
use affdim::svf::{s_closed_graph, s_closed_range};
use affdim::{Error, ExponentPair, SquareMatrix};
use clap::Subcommand;

use crate::estimate::{box_counts, BoxArgs, Source};
use crate::input::{emit, exponent_of, load_paths, mean_sd};
use crate::{Failure, Outcome};

#[derive(Subcommand, Debug)]
pub enum Command {
    /// KS test of X(ct) = c^D X(t) in law across replicas.
    Scaling {
        #[arg(long, default_value = "paths")]
        dir: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        /// Exponent to test; defaults to the one the paths were simulated with.
        #[arg(long = "D", id = "d_matrix", allow_hyphen_values = true)]
        d_matrix: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        significance: f64,
        /// Number of probe times.
        #[arg(long, default_value_t = 4)]
        probes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean box-count slope against the closed-form exponent.
    Dims {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        fit: BoxArgs,
        #[arg(long = "D", id = "d_matrix", allow_hyphen_values = true)]
        d_matrix: Option<String>,
        #[arg(long, default_value_t = 0.15)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Scaling { dir, c, d_matrix, significance, probes, out } => {
            scaling(dir, c, d_matrix, significance, probes, out)
        }
        Command::Dims { src, fit, d_matrix, tol, out } => dims(src, fit, d_matrix, tol, out),
    }
}

/// Lattice indices `i` (one parameter) with `c·i` also a lattice index,
/// spread over the lattice, largest first.
fn probe_indices(n: usize, c: f64, count: usize) -> Vec<usize> {
    let valid: Vec<usize> = (1..n)
        .filter(|&i| {
            let ci = c * i as f64;
            ci >= 1.0 - 1e-9 && (ci - ci.round()).abs() <= 1e-9 * i as f64
        })
        .collect();
    if valid.len() <= count {
        return valid.into_iter().rev().collect();
    }
    (0..count).map(|k| valid[(valid.len() - 1) * (count - k) / count]).collect()
}

fn scaling(
    dir: PathBuf,
    c: f64,
    d_matrix: Option<String>,
    significance: f64,
    probes: usize,
    out: Option<PathBuf>,
) -> Outcome {
    let paths = load_paths(&dir)?;
    let first = &paths[0];
    if first.d != 1 {
        return Err(Error::Unsupported("scaling verification is implemented for d = 1".into()).into());
    }
    let exponent = exponent_of(first, d_matrix.as_deref())?;
    let idx = probe_indices(first.n, c, probes.max(1));
    if idx.is_empty() {
        return Err(
            Error::Domain(format!("no lattice point t with c·t on the lattice for c = {c}, n = {}", first.n)).into()
        );
    }
    let h = first.spacing();
    let t: Vec<Vec<f64>> = idx.iter().map(|&i| vec![i as f64 * h]).collect();
    let r = verify_scaling(&paths, c, &exponent, &t, significance)?;
    let mut report = Report::new();
    report
        .root()
        .int("paths", paths.len() as i64)
        .float("c", c)
        .floats("exponent", &exponent.to_row_major())
        .float("significance", significance)
        .float("max_ks", r.max_ks)
        .float("threshold", r.threshold)
        .bool("pass", r.pass);
    let sec = report.section("probes");
    sec.floats("t", &r.per_point.iter().map(|p| p.t[0]).collect::<Vec<_>>())
        .ints("coordinate", &r.per_point.iter().map(|p| p.coordinate as i64).collect::<Vec<_>>())
        .floats("ks", &r.per_point.iter().map(|p| p.ks).collect::<Vec<_>>());
    emit(&report, &out.unwrap_or_else(|| dir.join("verify_scaling.toml")))?;
    if r.pass {
        Ok(())
    } else {
        Err(Failure::Breach(format!("KS {} ≥ critical value {}", r.max_ks, r.threshold)))
    }
}

fn dims(src: Source, fit: BoxArgs, d_matrix: Option<String>, tol: f64, out: Option<PathBuf>) -> Outcome {
    let paths = load_paths(&src.dir)?;
    let first = &paths[0];
    let exponent = exponent_of(first, d_matrix.as_deref())?;
    let pair = ExponentPair::new(SquareMatrix::identity(first.d), exponent, 0.5)?;
    let spec = spectrum_summary(&pair, 1e-7)?;
    let kind: Kind = src.kind.into();
    let expected = match kind {
        Kind::Graph => s_closed_graph(&spec)?.s,
        Kind::Range => s_closed_range(&spec)?.s,
    };
    let reps = box_counts(&paths, kind, &fit)?;
    let slopes: Vec<f64> = reps.iter().map(|r| r.slope).collect();
    let (mean, sd) = mean_sd(&slopes);
    let pass = (mean - expected).abs() <= tol;
    let mut report = Report::new();
    report
        .root()
        .str("kind", kind.as_str())
        .int("paths", paths.len() as i64)
        .float("closed_form", expected)
        .float("mean_slope", mean)
        .float("sd_slope", sd)
        .float("tol", tol)
        .bool("pass", pass)
        .floats("slopes", &slopes);
    emit(&report, &out.unwrap_or_else(|| src.dir.join("verify_dims.toml")))?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Breach(format!("mean slope {mean} vs closed form {expected} (tol {tol})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_land_on_the_lattice_after_scaling() {
        let idx = probe_indices(256, 0.5, 4);
        assert_eq!(idx.len(), 4);
        assert!(idx.iter().all(|i| i % 2 == 0));
        assert!(idx.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(probe_indices(256, 1.0 / 64.0, 4), vec![192, 128, 64]);
        assert!(probe_indices(8, 0.3, 4).is_empty());
    }
}
