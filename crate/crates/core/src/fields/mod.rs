//! Sample paths of self-affine fields on a regular lattice in `[0,1]^d`.
//!
//! The lattice has `n` points per axis at `t_i = i/(n−1)`; values are stored
//! in row-major lattice order (last axis fastest) with the `m` coordinates of
//! each point contiguous. Every path starts at `X(0) = 0`.

mod levy;
pub(crate) mod ofbm;
mod scaling;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use levy::{simulate_stable_levy, stable_variate};
pub use ofbm::{simulate_fbm, simulate_ofbm};
pub use scaling::{ks_critical_value, ks_statistic, verify_scaling, ProbeResult, ScalingTestReport};

use crate::error::{Error, Result};
use crate::report::{fmt_float, Report};

/// The random stream for one replica: ChaCha8 keyed by `seed`, with the
/// replica index as stream id, so replicas can be generated in any order.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    /// Gaussian operator fractional Brownian motion with exponent `D`
    /// (row-major `m×m`) and `E = I_d`.
    Ofbm { exponent: Vec<f64> },
    /// Independent symmetric stable coordinates.
    StableLevy { alphas: Vec<f64> },
    /// Anything not produced by a simulator here (loaded or constructed).
    External { name: String },
}

impl Model {
    pub fn name(&self) -> &str {
        match self {
            Model::Ofbm { .. } => "ofbm",
            Model::StableLevy { .. } => "stable-levy",
            Model::External { name } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldPath {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub values: Vec<f64>,
    pub model: Model,
    pub seed: u64,
    pub replica: u64,
}

impl FieldPath {
    /// Validates shape, finiteness and `X(0) = 0`.
    pub fn new(d: usize, m: usize, n: usize, values: Vec<f64>, model: Model, seed: u64, replica: u64) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::input("field dimensions must be positive"));
        }
        if n < 2 {
            return Err(Error::input("lattice needs at least 2 points per axis"));
        }
        let points = n.checked_pow(d as u32).ok_or_else(|| Error::input("lattice too large"))?;
        if values.len() != points * m {
            return Err(Error::input(format!("expected {} values, got {}", points * m, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("field values must be finite"));
        }
        if values[..m].iter().any(|&v| v != 0.0) {
            return Err(Error::input("field must vanish at the origin"));
        }
        Ok(FieldPath { d, m, n, values, model, seed, replica })
    }

    /// Builds a path from a function of `t`, e.g. deterministic test fields.
    pub fn from_fn(d: usize, m: usize, n: usize, name: &str, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let points = n.pow(d as u32);
        let mut values = Vec::with_capacity(points * m);
        let mut t = vec![0.0; d];
        for i in 0..points {
            lattice_point(n, d, i, &mut t);
            let x = f(&t);
            if x.len() != m {
                return Err(Error::input("value function returned the wrong dimension"));
            }
            values.extend(x);
        }
        FieldPath::new(d, m, n, values, Model::External { name: name.to_string() }, 0, 0)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.d];
        lattice_point(self.n, self.d, i, &mut t);
        t
    }

    /// Lattice index of `t`, if `t` lies on the lattice.
    pub fn index_of(&self, t: &[f64]) -> Option<usize> {
        if t.len() != self.d {
            return None;
        }
        let scale = (self.n - 1) as f64;
        let mut idx = 0;
        for &ti in t {
            let k = (ti * scale).round();
            if (ti * scale - k).abs() > 1e-9 || k < 0.0 || k > scale {
                return None;
            }
            idx = idx * self.n + k as usize;
        }
        Some(idx)
    }

    /// Graph points `(t, X(t))`, flattened with stride `d + m`.
    pub fn graph_points(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * (self.d + self.m));
        let mut t = vec![0.0; self.d];
        for i in 0..self.len() {
            lattice_point(self.n, self.d, i, &mut t);
            out.extend_from_slice(&t);
            out.extend_from_slice(self.value(i));
        }
        out
    }

    /// Range points `X(t)`, flattened with stride `m`.
    pub fn range_points(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> =
            (1..=self.d).map(|i| format!("t{i}")).chain((1..=self.m).map(|i| format!("x{i}"))).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        let mut t = vec![0.0; self.d];
        for i in 0..self.len() {
            lattice_point(self.n, self.d, i, &mut t);
            let row: Vec<String> = t.iter().chain(self.value(i)).map(|v| fmt_float(*v)).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn metadata(&self) -> Report {
        let mut r = Report::new();
        r.root()
            .str("model", self.model.name())
            .int("d", self.d as i64)
            .int("m", self.m as i64)
            .int("n", self.n as i64)
            .str("seed", self.seed.to_string())
            .int("replica", self.replica as i64);
        match &self.model {
            Model::Ofbm { exponent } => {
                r.section("params").floats("exponent", exponent);
            }
            Model::StableLevy { alphas } => {
                r.section("params").floats("alphas", alphas);
            }
            Model::External { .. } => {}
        }
        r
    }

    /// Writes the CSV and a `.meta.toml` sidecar next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        self.metadata().write(&meta_path(path))
    }

    /// Reads a path CSV; the sidecar is used when present.
    pub fn read(path: &Path) -> Result<FieldPath> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::input(format!("{}: empty file", path.display())))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let d = cols.iter().filter(|c| c.starts_with('t')).count();
        let m = cols.iter().filter(|c| c.starts_with('x')).count();
        if d == 0 || m == 0 || d + m != cols.len() {
            return Err(Error::input(format!("{}: bad header {header:?}", path.display())));
        }
        let mut values = Vec::new();
        let mut rows = 0usize;
        for (k, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + m {
                return Err(Error::input(format!("{}: row {} has {} fields", path.display(), k + 2, fields.len())));
            }
            for f in &fields[d..] {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::input(format!("{}: row {}: bad number {f:?}", path.display(), k + 2)))?;
                values.push(v);
            }
            rows += 1;
        }
        let n = (rows as f64).powf(1.0 / d as f64).round() as usize;
        if n.pow(d as u32) != rows {
            return Err(Error::input(format!("{}: {rows} rows is not a full {d}-dimensional lattice", path.display())));
        }
        let (model, seed, replica) = read_meta(&meta_path(path))?;
        FieldPath::new(d, m, n, values, model, seed, replica)
    }
}

fn lattice_point(n: usize, d: usize, mut i: usize, t: &mut [f64]) {
    let h = 1.0 / (n - 1) as f64;
    for k in (0..d).rev() {
        t[k] = (i % n) as f64 * h;
        i /= n;
    }
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

fn read_meta(path: &Path) -> Result<(Model, u64, u64)> {
    if !path.exists() {
        return Ok((Model::External { name: "external".into() }, 0, 0));
    }
    let text = std::fs::read_to_string(path)?;
    let table: toml::Table = text.parse().map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    let floats = |key: &str| -> Vec<f64> {
        table
            .get("params")
            .and_then(|p| p.get(key))
            .and_then(|v| v.as_array())
            .map(|a| a.iter().filter_map(|x| x.as_float()).collect())
            .unwrap_or_default()
    };
    let model = match table.get("model").and_then(|v| v.as_str()) {
        Some("ofbm") => Model::Ofbm { exponent: floats("exponent") },
        Some("stable-levy") => Model::StableLevy { alphas: floats("alphas") },
        Some(other) => Model::External { name: other.to_string() },
        None => Model::External { name: "external".into() },
    };
    let seed = table.get("seed").and_then(|v| v.as_str()).and_then(|s| s.parse().ok()).unwrap_or(0);
    let replica = table.get("replica").and_then(|v| v.as_integer()).unwrap_or(0) as u64;
    Ok((model, seed, replica))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_layout_is_row_major() {
        let p = FieldPath::from_fn(2, 1, 3, "sum", |t| vec![t[0] + 10.0 * t[1]]).unwrap();
        assert_eq!(p.point(1), vec![0.0, 0.5]);
        assert_eq!(p.point(3), vec![0.5, 0.0]);
        assert_eq!(p.value(1), &[5.0]);
        assert_eq!(p.index_of(&[0.5, 1.0]), Some(5));
        assert_eq!(p.index_of(&[0.3, 1.0]), None);
    }

    #[test]
    fn origin_must_vanish() {
        assert!(FieldPath::from_fn(1, 1, 4, "one", |_| vec![1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        let mut p = FieldPath::from_fn(1, 2, 9, "x", |t| vec![t[0] / 3.0, -t[0]]).unwrap();
        p.model = Model::StableLevy { alphas: vec![1.5, 2.0] };
        p.seed = u64::MAX;
        p.replica = 3;
        p.write(&file).unwrap();
        let q = FieldPath::read(&file).unwrap();
        assert_eq!(p, q);
    }
}
