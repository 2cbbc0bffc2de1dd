use std::path::PathBuf;

use affdim::matrix::spectrum_summary;
use affdim::report::{Report, Section};
use affdim::svf::{s_closed_graph, s_closed_range, s_numeric};
use affdim::{Error, ExponentPair, SValResult};

use crate::input::{emit, matrix};
use crate::{Failure, Outcome};

const INVARIANCE_SCALES: [f64; 3] = [0.1, 0.5, 0.9];

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Time exponent E (file or inline, e.g. "1" or "1,0;0,3").
    #[arg(long = "E", allow_hyphen_values = true, requires = "d_matrix", conflicts_with = "w")]
    e: Option<String>,
    /// Space exponent D.
    #[arg(long = "D", id = "d_matrix", allow_hyphen_values = true)]
    d: Option<String>,
    /// Scale c ∈ (0,1). When omitted, c-invariance is checked over 0.1, 0.5, 0.9.
    #[arg(long)]
    c: Option<f64>,
    /// Matrix W for a direct s(W, x) evaluation.
    #[arg(long = "W", id = "w", allow_hyphen_values = true, requires = "x")]
    w: Option<String>,
    #[arg(long)]
    x: Option<f64>,
    /// Also evaluate the numeric limit (always on with --W).
    #[arg(long)]
    numeric: bool,
    /// Residual tolerance of the numeric root.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Allowed gap between numeric and closed-form values.
    #[arg(long, default_value_t = 1e-4)]
    check_tol: f64,
    /// Relative tolerance for grouping eigenvalue real parts.
    #[arg(long, default_value_t = 1e-7)]
    cluster_tol: f64,
    #[arg(long, default_value = "sval.toml")]
    out: PathBuf,
}

fn record(sec: &mut Section, r: &SValResult) {
    sec.float("s", r.s)
        .int("branch_index", r.branch_index as i64)
        .str("case", r.case_tag.as_str())
        .str("method", r.method.as_str());
    if let Some(k) = r.k_used {
        sec.int("k_used", k as i64);
    }
    if let Some(res) = r.residual {
        sec.float("residual", res);
    }
}

fn spread(xs: &[f64]) -> f64 {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

pub fn run(a: Args) -> Outcome {
    let mut report = Report::new();
    if let Some(w) = &a.w {
        let w = matrix(w)?;
        let x = a.x.expect("clap enforces --x with --W");
        report.root().float("x", x).int("order", w.order() as i64);
        let r = s_numeric(&w, x, a.tol)?;
        record(report.section("numeric"), &r);
        emit(&report, &a.out)?;
        return Ok(());
    }
    let (Some(e), Some(d)) = (&a.e, &a.d) else {
        return Err(Error::Input("give either --E and --D, or --W and --x".into()).into());
    };
    let (e, d) = (matrix(e)?, matrix(d)?);
    let scales: Vec<f64> = match a.c {
        Some(c) => vec![c],
        None => INVARIANCE_SCALES.to_vec(),
    };
    let main_c = a.c.unwrap_or(0.5);
    let pair = ExponentPair::new(e, d, main_c)?;
    let spec = spectrum_summary(&pair, a.cluster_tol)?;
    let graph = s_closed_graph(&spec)?;
    let range = s_closed_range(&spec)?;
    report
        .root()
        .float("c", main_c)
        .float("q", pair.q())
        .int("d", pair.time_dim() as i64)
        .int("m", pair.space_dim() as i64)
        .floats("gamma", &spec.gamma);
    record(report.section("graph"), &graph);
    record(report.section("range"), &range);

    let mut closed_g = Vec::new();
    let mut closed_r = Vec::new();
    let mut num_g = Vec::new();
    let mut num_r = Vec::new();
    let mut breaches = Vec::new();
    for &c in &scales {
        let p = pair.with_c(c)?;
        let sp = spectrum_summary(&p, a.cluster_tol)?;
        closed_g.push(s_closed_graph(&sp)?.s);
        closed_r.push(s_closed_range(&sp)?.s);
        if a.numeric {
            let x = c.powf(p.q());
            let g = s_numeric(&p.w()?, x, a.tol)?;
            let r = s_numeric(&p.v()?, x, a.tol)?;
            if c == main_c {
                record(report.section("graph_numeric"), &g);
                record(report.section("range_numeric"), &r);
            }
            for (name, val, closed) in [("graph", g.s, graph.s), ("range", r.s, range.s)] {
                if (val - closed).abs() > a.check_tol {
                    breaches.push(format!("{name} at c = {c}: numeric {val} vs closed {closed}"));
                }
            }
            num_g.push(g.s);
            num_r.push(r.s);
        }
    }
    if a.c.is_none() {
        let sec = report.section("c_invariance");
        sec.floats("c", &scales)
            .float("closed_graph_spread", spread(&closed_g))
            .float("closed_range_spread", spread(&closed_r));
        if a.numeric {
            sec.floats("numeric_graph", &num_g)
                .floats("numeric_range", &num_r)
                .float("numeric_graph_spread", spread(&num_g))
                .float("numeric_range_spread", spread(&num_r));
            if spread(&num_g) > a.check_tol || spread(&num_r) > a.check_tol {
                breaches.push("numeric values depend on c".into());
            }
        }
    }
    report.root().bool("consistent", breaches.is_empty());
    emit(&report, &a.out)?;
    if breaches.is_empty() {
        Ok(())
    } else {
        Err(Failure::Breach(breaches.join("; ")))
    }
}
