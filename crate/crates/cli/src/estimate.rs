use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use affdim::fields::FieldPath;
use affdim::occupation::{
    box_count_dimension, density_sup_probe, energies, energy_blowup_scan, occupation_histogram, BoxCountReport,
    FitPolicy, Kind, PointSet, ProbeModel,
};
use affdim::report::{fmt_float, Report};
use affdim::{Error, ExponentPair, SquareMatrix};
use clap::{Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::input::{emit, load_paths, matrix, mean_sd};
use crate::Outcome;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Graph,
    Range,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Graph => Kind::Graph,
            KindArg::Range => Kind::Range,
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct Source {
    /// Directory holding path_*.csv files.
    #[arg(long, default_value = "paths")]
    pub dir: PathBuf,
    #[arg(long, value_enum, default_value = "graph")]
    pub kind: KindArg,
}

#[derive(clap::Args, Debug, Clone)]
pub struct BoxArgs {
    #[arg(long, default_value_t = 0)]
    pub min_level: u32,
    /// Finest level; defaults to log2 of the point count.
    #[arg(long)]
    pub max_level: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub drop_coarse: usize,
    #[arg(long, default_value_t = 2)]
    pub drop_fine: usize,
    #[arg(long, default_value_t = 4.0)]
    pub min_points_per_box: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Box-counting dimension of each path's graph or range.
    Boxcount {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        fit: BoxArgs,
        /// Report file; defaults to boxcount.toml in --dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Riesz energies, or a divergence scan over lattice refinements.
    Energy {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        /// Pairs per estimate; all pairs are used when there are fewer.
        #[arg(long, default_value_t = 1 << 22)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of lattice levels for a divergence scan (at least 3).
        #[arg(long)]
        refinements: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Occupation histogram summed over all paths.
    Histogram {
        #[command(flatten)]
        src: Source,
        /// One `lower:upper` per value axis.
        #[arg(long, value_delimiter = ',', required = true)]
        bounds: Vec<String>,
        /// Cells per axis (one value for all axes).
        #[arg(long, value_delimiter = ',', default_value = "32")]
        cells: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heuristic probe of the marginal density supremum on the fundamental annulus.
    Density(DensityArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProbeArg {
    Ofbm,
    Levy,
    Zero,
}

#[derive(clap::Args, Debug)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    model: ProbeArg,
    #[arg(long = "H", value_delimiter = ',')]
    h: Vec<f64>,
    #[arg(long = "D", id = "d_matrix", allow_hyphen_values = true)]
    d_matrix: Option<String>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    /// Probe times; `a:b` for a point in two parameters.
    #[arg(long = "t", value_delimiter = ',', default_value = "0.25,0.5,0.75,1")]
    t: Vec<String>,
    #[arg(long, default_value_t = 41)]
    x_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "density.toml")]
    out: PathBuf,
}

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Boxcount { src, fit, out } => boxcount(&src, &fit, out),
        Command::Energy { src, gamma, budget, seed, refinements, out } => {
            energy(&src, &gamma, budget, seed, refinements, out)
        }
        Command::Histogram { src, bounds, cells, out } => histogram(&src, &bounds, &cells, out),
        Command::Density(a) => density(a),
    }
}

fn report_path(out: Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    out.unwrap_or_else(|| dir.join(name))
}

/// Box counts for every path, in path order.
pub fn box_counts(paths: &[FieldPath], kind: Kind, fit: &BoxArgs) -> affdim::Result<Vec<BoxCountReport>> {
    let policy = FitPolicy {
        drop_coarse: fit.drop_coarse,
        drop_fine: fit.drop_fine,
        min_points_per_box: fit.min_points_per_box,
    };
    paths
        .par_iter()
        .map(|p| {
            let (pts, dim) = kind.points(p);
            let count = pts.len() / dim;
            let max = fit.max_level.unwrap_or_else(|| (count as f64).log2().ceil() as u32);
            box_count_dimension(&pts, dim, fit.min_level..=max, &policy)
        })
        .collect()
}

fn boxcount(src: &Source, fit: &BoxArgs, out: Option<PathBuf>) -> Outcome {
    let paths = load_paths(&src.dir)?;
    let reps = box_counts(&paths, src.kind.into(), fit)?;
    let slopes: Vec<f64> = reps.iter().map(|r| r.slope).collect();
    let (mean, sd) = mean_sd(&slopes);
    let mut report = Report::new();
    report
        .root()
        .str("kind", Kind::from(src.kind).as_str())
        .int("paths", paths.len() as i64)
        .float("mean_slope", mean)
        .float("sd_slope", sd)
        .floats("slopes", &slopes)
        .floats("residuals", &reps.iter().map(|r| r.residual).collect::<Vec<_>>())
        .ints("fit_first", &reps.iter().map(|r| r.fit_range.0 as i64).collect::<Vec<_>>())
        .ints("fit_last", &reps.iter().map(|r| r.fit_range.1 as i64).collect::<Vec<_>>())
        .bool("any_degenerate", reps.iter().any(|r| r.degenerate));
    let mut csv = String::from("replica,level,scale,count\n");
    for (i, r) in reps.iter().enumerate() {
        for ((l, s), c) in r.levels.iter().zip(&r.scales).zip(&r.counts) {
            let _ = writeln!(csv, "{i},{l},{},{c}", fmt_float(*s));
        }
    }
    std::fs::write(src.dir.join("boxcount.csv"), csv)?;
    emit(&report, &report_path(out, &src.dir, "boxcount.toml"))?;
    Ok(())
}

fn energy(
    src: &Source,
    gammas: &[f64],
    budget: u64,
    seed: u64,
    refinements: Option<usize>,
    out: Option<PathBuf>,
) -> Outcome {
    let paths = load_paths(&src.dir)?;
    let kind: Kind = src.kind.into();
    let mut report = Report::new();
    report
        .root()
        .str("kind", kind.as_str())
        .int("paths", paths.len() as i64)
        .floats("gamma", gammas)
        .int("budget", budget as i64)
        .str("seed", seed.to_string());
    let mut csv = String::new();
    if let Some(levels) = refinements {
        let rows = energy_blowup_scan(&paths, kind, gammas, levels, budget, seed)?;
        report.root().int("refinements", levels as i64);
        csv.push_str("gamma,level,estimate\n");
        for row in &rows {
            report
                .section(&format!("gamma_{}", row.gamma).replace('.', "_"))
                .float("gamma", row.gamma)
                .floats("estimates", &row.estimates)
                .float("ratio", row.ratio)
                .bool("divergent", row.divergent);
            for (l, e) in row.estimates.iter().enumerate() {
                let _ = writeln!(csv, "{},{l},{}", fmt_float(row.gamma), fmt_float(*e));
            }
        }
        if let Some(first) = rows.iter().find(|r| r.divergent) {
            report.root().float("first_divergent_gamma", first.gamma);
        }
    } else {
        csv.push_str("gamma,replica,value\n");
        let per_path: Vec<_> = paths
            .iter()
            .enumerate()
            .map(|(i, p)| energies(&PointSet::from_path(p), kind, gammas, budget, seed.wrapping_add(i as u64)))
            .collect::<affdim::Result<_>>()?;
        for (k, &g) in gammas.iter().enumerate() {
            let vals: Vec<f64> = per_path.iter().map(|e| e[k].value).collect();
            let (mean, sd) = mean_sd(&vals);
            report
                .section(&format!("gamma_{g}").replace('.', "_"))
                .float("gamma", g)
                .float("mean", mean)
                .float("sd", sd)
                .floats("values", &vals)
                .ints("duplicates", &per_path.iter().map(|e| e[k].duplicates as i64).collect::<Vec<_>>())
                .bool("exhaustive", per_path.iter().all(|e| e[k].exhaustive));
            for (i, v) in vals.iter().enumerate() {
                let _ = writeln!(csv, "{},{i},{}", fmt_float(g), fmt_float(*v));
            }
        }
    }
    std::fs::write(src.dir.join("energy.csv"), csv)?;
    emit(&report, &report_path(out, &src.dir, "energy.toml"))?;
    Ok(())
}

fn parse_bounds(items: &[String]) -> affdim::Result<Vec<(f64, f64)>> {
    items
        .iter()
        .map(|s| {
            let bad = || Error::Input(format!("bound {s:?} is not lower:upper"));
            let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
            Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn histogram(src: &Source, bounds: &[String], cells: &[usize], out: Option<PathBuf>) -> Outcome {
    let paths = load_paths(&src.dir)?;
    let bounds = parse_bounds(bounds)?;
    let hists: Vec<_> = paths
        .iter()
        .map(|p| occupation_histogram(p, src.kind.into(), &bounds, cells))
        .collect::<affdim::Result<_>>()?;
    let first = &hists[0];
    let mut counts = vec![0u64; first.counts.len()];
    let (mut overflow, mut total) = (0u64, 0u64);
    for h in &hists {
        for (c, v) in counts.iter_mut().zip(&h.counts) {
            *c += v;
        }
        overflow += h.overflow;
        total += h.total;
    }
    let conserved = counts.iter().sum::<u64>() + overflow == total;
    let mut report = Report::new();
    report
        .root()
        .str("kind", first.kind.as_str())
        .int("paths", paths.len() as i64)
        .ints("cells", &first.cells.iter().map(|&c| c as i64).collect::<Vec<_>>())
        .floats("lower", &first.bounds.iter().map(|b| b.0).collect::<Vec<_>>())
        .floats("upper", &first.bounds.iter().map(|b| b.1).collect::<Vec<_>>())
        .int("points", total as i64)
        .float("overflow_mass", overflow as f64 / total as f64)
        .bool("mass_conserved", conserved);

    // One row per cell: cell centers on every axis, then the mass.
    let axes = first.cells.len();
    let mut csv = String::new();
    let header: Vec<String> = (0..axes).map(|k| format!("c{k}")).collect();
    let _ = writeln!(csv, "{},mass", header.join(","));
    for (idx, &c) in counts.iter().enumerate() {
        let mut rem = idx;
        let mut centers = vec![0.0; axes];
        for k in (0..axes).rev() {
            let (lo, hi) = first.bounds[k];
            let n = first.cells[k];
            centers[k] = lo + (hi - lo) * ((rem % n) as f64 + 0.5) / n as f64;
            rem /= n;
        }
        let row: Vec<String> = centers.iter().map(|v| fmt_float(*v)).collect();
        let _ = writeln!(csv, "{},{}", row.join(","), fmt_float(c as f64 / total as f64));
    }
    std::fs::write(src.dir.join("histogram.csv"), csv)?;
    emit(&report, &report_path(out, &src.dir, "histogram.toml"))?;
    Ok(())
}

fn parse_time(s: &str) -> affdim::Result<Vec<f64>> {
    s.split(':').map(|v| v.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad probe time {s:?}")))).collect()
}

fn density(a: DensityArgs) -> Outcome {
    let (model, exponent) = match a.model {
        ProbeArg::Ofbm => {
            let d = match (&a.d_matrix, a.h.is_empty()) {
                (Some(m), _) => matrix(m)?,
                (None, false) => SquareMatrix::diagonal(&a.h)?,
                (None, true) => return Err(Error::Input("ofbm needs --H or --D".into()).into()),
            };
            (ProbeModel::Ofbm { exponent: d.clone(), d: a.d }, d)
        }
        ProbeArg::Levy => {
            if a.alpha.is_empty() {
                return Err(Error::Input("levy needs --alpha".into()).into());
            }
            let d = SquareMatrix::diagonal(&a.alpha.iter().map(|x| 1.0 / x).collect::<Vec<_>>())?;
            (ProbeModel::StableLevy { alphas: a.alpha.clone() }, d)
        }
        ProbeArg::Zero => {
            let d = match &a.d_matrix {
                Some(m) => matrix(m)?,
                None => return Err(Error::Input("zero model needs --D for the annulus".into()).into()),
            };
            (ProbeModel::Zero { d: a.d, m: d.order() }, d)
        }
    };
    let pair = ExponentPair::new(SquareMatrix::identity(a.d), exponent, a.c)?;
    let t_grid: Vec<Vec<f64>> = a.t.iter().map(|s| parse_time(s)).collect::<affdim::Result<_>>()?;
    let r = density_sup_probe(&model, &pair, a.samples, &t_grid, a.x_points, a.seed)?;
    let mut report = Report::new();
    report
        .root()
        .bool("heuristic", true)
        .float("c", a.c)
        .int("samples_per_t", a.samples as i64)
        .int("x_points", a.x_points as i64)
        .str("seed", a.seed.to_string())
        .float("max_density", r.max_density)
        .floats("argmax_t", &r.argmax_t)
        .floats("argmax_x", &r.argmax_x)
        .bool("unbounded", r.unbounded)
        .floats("per_t", &r.per_t);
    emit(&report, &a.out)?;
    Ok(())
}
