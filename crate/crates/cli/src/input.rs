//! Matrices, path directories and report output.

use std::path::{Path, PathBuf};

use affdim::fields::{FieldPath, Model};
use affdim::report::Report;
use affdim::{Error, SquareMatrix};

/// A matrix from a file in the plain-text format, or inline with rows
/// separated by `;` and entries by `,` or spaces (`"0.5,0;0,0.8"`).
pub fn matrix(arg: &str) -> Result<SquareMatrix, Error> {
    let path = Path::new(arg);
    if path.is_file() {
        return SquareMatrix::read_file(path);
    }
    let rows: Vec<Vec<f64>> = arg
        .split(';')
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Input(format!("{arg:?} is neither a file nor an inline matrix")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    SquareMatrix::from_rows(&refs)
}

pub fn path_file(dir: &Path, replica: usize) -> PathBuf {
    dir.join(format!("path_{replica:05}.csv"))
}

/// All `path_*.csv` files in `dir`, in name order.
pub fn load_paths(dir: &Path) -> Result<Vec<FieldPath>, Error> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("path_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Input(format!("no path_*.csv files in {}", dir.display())));
    }
    files.iter().map(|f| FieldPath::read(f)).collect()
}

/// `D` recorded by the simulator, or the explicit override.
pub fn exponent_of(path: &FieldPath, explicit: Option<&str>) -> Result<SquareMatrix, Error> {
    if let Some(arg) = explicit {
        return matrix(arg);
    }
    match &path.model {
        Model::Ofbm { exponent } => SquareMatrix::from_row_major(path.m, exponent),
        Model::StableLevy { alphas } => SquareMatrix::diagonal(&alphas.iter().map(|a| 1.0 / a).collect::<Vec<_>>()),
        Model::External { name } => {
            Err(Error::Input(format!("paths come from {name:?} with no recorded exponent; pass --D")))
        }
    }
}

/// Prints the report and writes it to `path`.
pub fn emit(report: &Report, path: &Path) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    report.write(path)?;
    print!("{}", report.render());
    Ok(())
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
