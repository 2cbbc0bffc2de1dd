use std::path::PathBuf;

use affdim::dims::{
    graph_dim_oss_stable, graph_dim_semistable_levy, identity_suite, range_dim_oss_stable, range_dim_semistable_levy,
    DimensionFormulaResult,
};
use affdim::report::{Report, Section};
use affdim::{Error, SpectrumSummary};
use clap::ValueEnum;

use crate::input::emit;
use crate::{Failure, Outcome};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    /// Operator-self-similar stable fields.
    OssStable,
    /// Operator semistable Lévy processes (d = 1, E = [1]).
    Levy,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Real parts of the eigenvalues of E (oss-stable only).
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    /// Real parts of the eigenvalues of D.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda: Vec<f64>,
    /// Multiplicity of each entry of --lambda (one value applies to all).
    #[arg(long, value_delimiter = ',')]
    mult: Vec<usize>,
    #[arg(long, default_value = "dim.toml")]
    out: PathBuf,
}

fn expand(values: &[f64], mult: &[usize]) -> Result<Vec<f64>, Error> {
    let mult: Vec<usize> = match mult.len() {
        0 => vec![1; values.len()],
        1 => vec![mult[0]; values.len()],
        n if n == values.len() => mult.to_vec(),
        n => return Err(Error::Input(format!("{n} multiplicities for {} values", values.len()))),
    };
    Ok(values.iter().zip(&mult).flat_map(|(&v, &k)| std::iter::repeat_n(v, k)).collect())
}

fn record(sec: &mut Section, r: &affdim::Result<DimensionFormulaResult>) {
    match r {
        Ok(r) => {
            sec.float("value", r.value)
                .str("formula", r.family.as_str())
                .str("branch", r.branch.as_str())
                .bool("valid", r.is_valid());
            for (i, p) in r.validity.iter().enumerate() {
                let state = if p.satisfied { "holds" } else { "violated" };
                sec.str(&format!("precondition_{}", i + 1), format!("{}: {state}", p.name));
            }
        }
        Err(e) => {
            sec.str("error", e.to_string());
        }
    }
}

pub fn run(a: Args) -> Outcome {
    let e_values = match a.family {
        FamilyArg::Levy => {
            if !a.a.is_empty() && a.a != [1.0] {
                return Err(Error::Domain("the Lévy family has E = [1]; drop --a".into()).into());
            }
            vec![1.0]
        }
        FamilyArg::OssStable => {
            if a.a.is_empty() {
                return Err(Error::Input("--a is required for the oss-stable family".into()).into());
            }
            a.a.clone()
        }
    };
    let lambda = expand(&a.lambda, &a.mult)?;
    let spec = SpectrumSummary::from_values(&e_values, &lambda)?;
    let (graph, range) = match a.family {
        FamilyArg::OssStable => (graph_dim_oss_stable(&spec), range_dim_oss_stable(&spec)),
        FamilyArg::Levy => (graph_dim_semistable_levy(&spec), range_dim_semistable_levy(&spec)),
    };
    let suite = identity_suite(&spec)?;

    let mut report = Report::new();
    report
        .root()
        .str("family", a.family.to_possible_value().expect("no skipped variants").get_name())
        .floats("a", &e_values)
        .floats("lambda", &lambda)
        .float("q", spec.q);
    record(report.section("graph"), &graph);
    record(report.section("range"), &range);
    let sec = report.section("exponents");
    sec.float("graph", suite.graph)
        .float("range", suite.range)
        .bool("range_saturated", suite.range_saturated)
        .bool("graph_equals_range", suite.graph_equals_range);
    let sec = report.section("identities");
    for c in &suite.checks {
        sec.str(c.name, c.status.as_str());
        if let (Some(l), Some(r)) = (c.lhs, c.rhs) {
            sec.floats(&format!("{}_values", c.name), &[l, r]);
        }
        if !c.note.is_empty() {
            sec.str(&format!("{}_note", c.name), c.note.as_str());
        }
    }
    emit(&report, &a.out)?;
    graph?;
    if let Err(e) = range {
        return Err(e.into());
    }
    if suite.all_passed() {
        Ok(())
    } else {
        let failed: Vec<String> = suite
            .checks
            .iter()
            .filter(|c| c.status == affdim::dims::CheckStatus::Fail)
            .map(|c| c.to_string())
            .collect();
        Err(Failure::Breach(failed.join("; ")))
    }
}
