//! Gridded occupation measures.
//!
//! Each lattice point carries weight `n^{−d}`. Masses are kept as integer
//! point counts over a common total, so conservation is exact.

use super::Kind;
use crate::error::{Error, Result};
use crate::fields::FieldPath;

#[derive(Clone, Debug, PartialEq)]
pub struct OccupationHistogram {
    pub kind: Kind,
    /// Per-axis `(lower, upper)`; for graphs the first `d` axes are `[0, 1]`.
    pub bounds: Vec<(f64, f64)>,
    pub cells: Vec<usize>,
    /// Point counts per cell, row-major over the axes (last axis fastest).
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub total: u64,
}

impl OccupationHistogram {
    pub fn mass(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    pub fn overflow_mass(&self) -> f64 {
        self.overflow as f64 / self.total as f64
    }

    /// Whether cell counts plus overflow account for every point.
    pub fn conserves_mass(&self) -> bool {
        self.counts.iter().sum::<u64>() + self.overflow == self.total
    }

    fn cell_index(&self, coords: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for ((&v, &(lo, hi)), &k) in coords.iter().zip(&self.bounds).zip(&self.cells) {
            if !(v >= lo && v <= hi) {
                return None;
            }
            let c = (((v - lo) / (hi - lo)) * k as f64).floor() as usize;
            idx = idx * k + c.min(k - 1);
        }
        Some(idx)
    }
}

/// Histogram of the graph or range occupation measure of `path`.
/// `bounds` covers the `m` value axes; `cells` gives the resolution per
/// histogram axis, or a single entry used for all axes.
pub fn occupation_histogram(
    path: &FieldPath,
    kind: Kind,
    bounds: &[(f64, f64)],
    cells: &[usize],
) -> Result<OccupationHistogram> {
    if path.is_empty() {
        return Err(Error::domain("empty path"));
    }
    if bounds.len() != path.m {
        return Err(Error::input(format!("need {} value bounds, got {}", path.m, bounds.len())));
    }
    if bounds.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(Error::input("each bound must satisfy lower < upper"));
    }
    let axes = match kind {
        Kind::Graph => path.d + path.m,
        Kind::Range => path.m,
    };
    let cells = match cells.len() {
        1 => vec![cells[0]; axes],
        k if k == axes => cells.to_vec(),
        k => return Err(Error::input(format!("need 1 or {axes} cell counts, got {k}"))),
    };
    if cells.iter().any(|&k| k < 2) {
        return Err(Error::input("at least 2 cells per axis"));
    }
    let size = cells.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k));
    let size = size.filter(|&s| s <= 1 << 28).ok_or_else(|| Error::input("histogram grid too large"))?;
    let mut all_bounds = match kind {
        Kind::Graph => vec![(0.0, 1.0); path.d],
        Kind::Range => Vec::new(),
    };
    all_bounds.extend_from_slice(bounds);
    let mut h = OccupationHistogram {
        kind,
        bounds: all_bounds,
        cells,
        counts: vec![0; size],
        overflow: 0,
        total: path.len() as u64,
    };
    let (points, dim) = kind.points(path);
    for p in points.chunks_exact(dim) {
        match h.cell_index(p) {
            Some(i) => h.counts[i] += 1,
            None => h.overflow += 1,
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_path_range_is_one_atom() {
        let p = FieldPath::from_fn(1, 1, 64, "zero", |_| vec![0.0]).unwrap();
        let h = occupation_histogram(&p, Kind::Range, &[(-1.0, 1.0)], &[4]).unwrap();
        assert_eq!(h.counts, vec![0, 0, 64, 0]);
        assert!(h.conserves_mass());
    }

    #[test]
    fn diagonal_graph_is_uniform_on_diagonal() {
        let p = FieldPath::from_fn(1, 1, 64, "diag", |t| vec![t[0]]).unwrap();
        let h = occupation_histogram(&p, Kind::Graph, &[(0.0, 1.0)], &[4]).unwrap();
        let mass = h.mass();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.25 } else { 0.0 };
                assert_eq!(mass[i * 4 + j], want);
            }
        }
        assert_eq!(h.overflow, 0);
    }

    #[test]
    fn overflow_is_accounted() {
        let p = FieldPath::from_fn(1, 1, 10, "ramp", |t| vec![3.0 * t[0]]).unwrap();
        let h = occupation_histogram(&p, Kind::Range, &[(-1.0, 1.0)], &[5]).unwrap();
        assert!(h.overflow > 0);
        assert!(h.conserves_mass());
        assert!(occupation_histogram(&p, Kind::Range, &[(-1.0, 1.0)], &[1]).is_err());
    }
}
