//! Box-counting dimension of a finite point set.
//!
//! Points are shifted to the origin and divided by the largest axis extent,
//! so the set fits in `[0,1]^k` with its aspect ratio kept. At level `j` the
//! boxes have side `ε = 2^{−j}`; the slope of `ln N(ε)` against `ln(1/ε)` is
//! fitted by least squares over the middle levels.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 1000;

/// Which levels enter the fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitPolicy {
    /// Coarsest levels dropped.
    pub drop_coarse: usize,
    /// Finest levels dropped.
    pub drop_fine: usize,
    /// Levels whose mean number of distinct points per occupied box falls
    /// below this are dropped too: there the count only reflects sampling.
    pub min_points_per_box: f64,
}

impl Default for FitPolicy {
    fn default() -> Self {
        FitPolicy { drop_coarse: 1, drop_fine: 2, min_points_per_box: 4.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxCountReport {
    pub levels: Vec<u32>,
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    /// Inclusive index range into `levels` used by the fit.
    pub fit_range: (usize, usize),
    /// Root-mean-square residual of the fit in `ln N`.
    pub residual: f64,
    pub distinct_points: usize,
    pub degenerate: bool,
}

fn dedup_points(points: &[f64], dim: usize) -> Vec<&[f64]> {
    let mut rows: Vec<&[f64]> = points.chunks_exact(dim).collect();
    let cmp = |a: &&[f64], b: &&[f64]| {
        a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    };
    rows.sort_by(cmp);
    rows.dedup_by(|a, b| cmp(&&**a, &&**b).is_eq());
    rows
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Box-counting dimension of `points` (flattened rows of length `dim`) over
/// dyadic levels `levels`.
pub fn box_count_dimension(
    points: &[f64],
    dim: usize,
    levels: RangeInclusive<u32>,
    policy: &FitPolicy,
) -> Result<BoxCountReport> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::input("point buffer does not match the dimension"));
    }
    if points.len() / dim < MIN_POINTS {
        return Err(Error::domain(format!("{} points; at least {MIN_POINTS} are needed", points.len() / dim)));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("points must be finite"));
    }
    let levels: Vec<u32> = levels.collect();
    if levels.len() < 4 {
        return Err(Error::domain("at least 4 scales are needed"));
    }
    let max_level = (127 / dim as u32).min(52);
    if *levels.last().unwrap() > max_level {
        return Err(Error::input(format!("finest level exceeds {max_level} for dimension {dim}")));
    }
    let rows = dedup_points(points, dim);
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for r in &rows {
        for k in 0..dim {
            lo[k] = lo[k].min(r[k]);
            hi[k] = hi[k].max(r[k]);
        }
    }
    let extent = (0..dim).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let scales: Vec<f64> = levels.iter().map(|&j| (-(j as f64)).exp2()).collect();
    if extent == 0.0 {
        return Ok(BoxCountReport {
            counts: vec![1; levels.len()],
            levels,
            scales,
            slope: 0.0,
            intercept: 0.0,
            fit_range: (0, 0),
            residual: 0.0,
            distinct_points: rows.len(),
            degenerate: true,
        });
    }
    let unit: Vec<Vec<f64>> = rows.iter().map(|r| (0..dim).map(|k| (r[k] - lo[k]) / extent).collect()).collect();
    let mut keys = vec![0u128; unit.len()];
    let counts: Vec<u64> = levels
        .iter()
        .map(|&j| {
            let side = (j as f64).exp2();
            let top = (1u64 << j) - 1;
            for (key, u) in keys.iter_mut().zip(&unit) {
                *key = u.iter().fold(0u128, |acc, &v| {
                    let b = ((v * side).floor() as u64).min(top);
                    (acc << j) | b as u128
                });
            }
            keys.sort_unstable();
            keys.dedup();
            let c = keys.len() as u64;
            keys.resize(unit.len(), 0);
            c
        })
        .collect();
    let first = policy.drop_coarse;
    let mut last = levels.len().saturating_sub(1 + policy.drop_fine);
    while last > first && (rows.len() as f64) / (counts[last] as f64) < policy.min_points_per_box {
        last -= 1;
    }
    if last < first + 1 {
        return Err(Error::numeric(format!(
            "fewer than two levels left to fit (levels {:?}, counts {counts:?})",
            levels
        )));
    }
    let x: Vec<f64> = levels[first..=last].iter().map(|&j| j as f64 * std::f64::consts::LN_2).collect();
    let y: Vec<f64> = counts[first..=last].iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(BoxCountReport {
        levels,
        scales,
        counts,
        slope,
        intercept,
        fit_range: (first, last),
        residual,
        distinct_points: rows.len(),
        degenerate: false,
    })
}
