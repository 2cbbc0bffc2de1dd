//! Empirical occupation measures and fractal estimators for sample paths.

mod boxcount;
mod density;
mod energy;
mod histogram;

pub use boxcount::{box_count_dimension, BoxCountReport, FitPolicy};
pub use density::{density_sup_probe, DensityProbeReport, ProbeModel};
pub use energy::{energies, energy_blowup_scan, energy_integral, BlowupRow, EnergyEstimate, BLOWUP_RATIO};
pub use histogram::{occupation_histogram, OccupationHistogram};

use crate::error::{Error, Result};
use crate::fields::FieldPath;

/// Occupation measure of the graph `(t, X(t))` or of the range `X(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Graph,
    Range,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Graph => "graph",
            Kind::Range => "range",
        }
    }

    /// Points of `path` in this kind, flattened, with their dimension.
    pub fn points(self, path: &FieldPath) -> (Vec<f64>, usize) {
        match self {
            Kind::Graph => (path.graph_points(), path.d + path.m),
            Kind::Range => (path.range_points(), path.m),
        }
    }
}

/// Lattice points `t` and values `X(t)` of a path, possibly thinned to every
/// `stride`-th lattice point along each axis.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub d: usize,
    pub m: usize,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub spacing: f64,
}

impl PointSet {
    pub fn from_path(path: &FieldPath) -> Self {
        Self::strided(path, 1).expect("stride 1 is always valid")
    }

    /// Keeps lattice indices `0, s, 2s, …` (up to `n − 1`) on every axis.
    pub fn strided(path: &FieldPath, stride: usize) -> Result<Self> {
        if stride == 0 || stride >= path.n {
            return Err(Error::input(format!("stride {stride} invalid for n = {}", path.n)));
        }
        let per_axis: Vec<usize> = (0..path.n).step_by(stride).collect();
        let count = per_axis.len().pow(path.d as u32);
        let mut t = Vec::with_capacity(count * path.d);
        let mut x = Vec::with_capacity(count * path.m);
        for j in 0..count {
            let mut rem = j;
            let mut digits = vec![0; path.d];
            for k in (0..path.d).rev() {
                digits[k] = per_axis[rem % per_axis.len()];
                rem /= per_axis.len();
            }
            let idx = digits.iter().fold(0, |acc, &dk| acc * path.n + dk);
            t.extend(path.point(idx));
            x.extend_from_slice(path.value(idx));
        }
        Ok(PointSet { d: path.d, m: path.m, t, x, spacing: stride as f64 * path.spacing() })
    }

    pub fn len(&self) -> usize {
        self.t.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t(&self, i: usize) -> &[f64] {
        &self.t[i * self.d..(i + 1) * self.d]
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.m..(i + 1) * self.m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strided_points_are_lattice_points() {
        let p = FieldPath::from_fn(2, 1, 8, "f", |t| vec![t[0] - t[1] * t[1]]).unwrap();
        let s = PointSet::strided(&p, 3).unwrap();
        assert_eq!(s.len(), 9);
        for i in 0..s.len() {
            let j = p.index_of(s.t(i)).unwrap();
            assert_eq!(s.x(i), p.value(j));
        }
        assert!((s.spacing - 3.0 / 7.0).abs() < 1e-15);
        assert_eq!(PointSet::from_path(&p).len(), 64);
    }
}
