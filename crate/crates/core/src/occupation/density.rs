//! Heuristic probe of the marginal densities `p_t(x)` of `X(t)` over the
//! fundamental annulus `A = [−1,1]^{d+m} \ W([−1,1]^{d+m})`, `W = c^{E⊕D}`.
//!
//! A bounded supremum is what the dimension results require of the
//! occupation intensity. The probe draws exact samples of `X(t)` for each `t`
//! on a grid, estimates the density by a Gaussian product kernel with
//! Silverman bandwidths, and reports the largest value found on an `x` grid
//! inside the (closed) annulus. It can suggest, never prove, boundedness.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::ofbm::diagonalize;
use crate::fields::{replica_rng, stable_variate};
use crate::matrix::{ExponentPair, SquareMatrix};

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeModel {
    /// Operator fractional Brownian motion with exponent `D`, `E = I_d`.
    Ofbm {
        exponent: SquareMatrix,
        d: usize,
    },
    StableLevy {
        alphas: Vec<f64>,
    },
    /// The deterministic field `X ≡ 0`, which has no density.
    Zero {
        d: usize,
        m: usize,
    },
}

impl ProbeModel {
    fn dims(&self) -> (usize, usize) {
        match self {
            ProbeModel::Ofbm { exponent, d } => (*d, exponent.order()),
            ProbeModel::StableLevy { alphas } => (1, alphas.len()),
            ProbeModel::Zero { d, m } => (*d, *m),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityProbeReport {
    pub max_density: f64,
    pub argmax_t: Vec<f64>,
    pub argmax_x: Vec<f64>,
    /// The sampled law has no density (all samples coincide).
    pub unbounded: bool,
    /// Largest estimate inside the annulus for each probed `t`
    /// (`NaN` where no grid point of that slice lies in the annulus).
    pub per_t: Vec<f64>,
}

type Sampler = Box<dyn Fn(&[f64], &mut rand_chacha::ChaCha8Rng) -> Vec<f64> + Sync>;

fn sampler(model: &ProbeModel) -> Result<Sampler> {
    Ok(match model {
        ProbeModel::Ofbm { exponent, .. } => {
            let (p, h) = diagonalize(exponent)?;
            Box::new(move |t, rng| {
                let r = t.iter().map(|v| v * v).sum::<f64>().sqrt();
                let z: Vec<f64> = h.iter().map(|&hi| r.powf(hi) * rng.sample::<f64, _>(StandardNormal)).collect();
                (0..z.len()).map(|i| (0..z.len()).map(|k| p[(i, k)] * z[k]).sum()).collect()
            })
        }
        ProbeModel::StableLevy { alphas } => {
            if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a <= 2.0)) {
                return Err(Error::domain(format!("stability index {a} outside (0, 2]")));
            }
            let alphas = alphas.clone();
            Box::new(move |t, rng| alphas.iter().map(|&a| t[0].powf(1.0 / a) * stable_variate(a, rng)).collect())
        }
        ProbeModel::Zero { m, .. } => {
            let m = *m;
            Box::new(move |_, _| vec![0.0; m])
        }
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn silverman(values: &mut [f64], dim: usize) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    values.sort_by(f64::total_cmp);
    let iqr = (quantile(values, 0.75) - quantile(values, 0.25)) / 1.34;
    let spread = match (sd > 0.0 && sd.is_finite(), iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => 0.0,
    };
    0.9 * spread * n.powf(-1.0 / (dim as f64 + 4.0))
}

/// Estimated `sup_{(t,x) ∈ A} p_t(x)` over `t_grid` and an `x` grid with
/// `x_points` points per axis on `[−1, 1]`.
pub fn density_sup_probe(
    model: &ProbeModel,
    pair: &ExponentPair,
    samples_per_t: usize,
    t_grid: &[Vec<f64>],
    x_points: usize,
    seed: u64,
) -> Result<DensityProbeReport> {
    let (d, m) = model.dims();
    if pair.time_dim() != d || pair.space_dim() != m {
        return Err(Error::input(format!(
            "model has d = {d}, m = {m}; exponent pair has d = {}, m = {}",
            pair.time_dim(),
            pair.space_dim()
        )));
    }
    if samples_per_t < 100 {
        return Err(Error::input("at least 100 samples per t are needed"));
    }
    if x_points < 3 {
        return Err(Error::input("at least 3 grid points per axis are needed"));
    }
    if let Some(t) =
        t_grid.iter().find(|t| t.len() != d || t.iter().all(|&v| v == 0.0) || t.iter().any(|v| v.abs() > 1.0))
    {
        return Err(Error::domain(format!("probe time {t:?} must be a nonzero point of [−1, 1]^{d}")));
    }
    let w_inv =
        pair.w()?.into_dmatrix().try_inverse().ok_or_else(|| Error::numeric("scaling matrix is not invertible"))?;
    let grid: Vec<f64> = (0..x_points).map(|i| -1.0 + 2.0 * i as f64 / (x_points - 1) as f64).collect();
    let cells = x_points.pow(m as u32);
    let in_annulus = |t: &[f64], x: &[f64]| {
        let z: Vec<f64> = t.iter().chain(x).copied().collect();
        let y = &w_inv * nalgebra::DVector::from_vec(z);
        y.amax() >= 1.0 - 1e-12
    };
    let sample = sampler(model)?;

    let per_t: Vec<Result<(f64, Vec<f64>, bool)>> = t_grid
        .par_iter()
        .enumerate()
        .map(|(k, t)| {
            let mut rng = replica_rng(seed, k as u64);
            let draws: Vec<Vec<f64>> = (0..samples_per_t).map(|_| sample(t, &mut rng)).collect();
            let mut bw = Vec::with_capacity(m);
            for axis in 0..m {
                let mut col: Vec<f64> = draws.iter().map(|x| x[axis]).collect();
                bw.push(silverman(&mut col, m));
            }
            if bw.contains(&0.0) {
                return Ok((f64::INFINITY, vec![0.0; m], true));
            }
            let norm =
                bw.iter().map(|b| b * (2.0 * std::f64::consts::PI).sqrt()).product::<f64>() * samples_per_t as f64;
            let mut best = (f64::NAN, Vec::new(), false);
            let mut x = vec![0.0; m];
            for cell in 0..cells {
                let mut rem = cell;
                for axis in (0..m).rev() {
                    x[axis] = grid[rem % x_points];
                    rem /= x_points;
                }
                if !in_annulus(t, &x) {
                    continue;
                }
                let dens: f64 = draws
                    .iter()
                    .map(|s| {
                        let q: f64 = (0..m).map(|a| ((x[a] - s[a]) / bw[a]).powi(2)).sum();
                        (-0.5 * q).exp()
                    })
                    .sum::<f64>()
                    / norm;
                if !(dens <= best.0) {
                    best = (dens, x.clone(), false);
                }
            }
            Ok(best)
        })
        .collect();

    let mut report = DensityProbeReport {
        max_density: f64::NAN,
        argmax_t: Vec::new(),
        argmax_x: Vec::new(),
        unbounded: false,
        per_t: Vec::with_capacity(t_grid.len()),
    };
    for (t, res) in t_grid.iter().zip(per_t) {
        let (dens, x, degenerate) = res?;
        report.per_t.push(dens);
        if degenerate {
            report.unbounded = true;
        }
        if !dens.is_nan() && !(dens <= report.max_density) {
            report.max_density = dens;
            report.argmax_t = t.clone();
            report.argmax_x = x;
        }
    }
    if report.max_density.is_nan() {
        return Err(Error::domain("no grid point lies in the annulus"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_pair(lambda: f64) -> ExponentPair {
        ExponentPair::new(SquareMatrix::identity(1), SquareMatrix::from_rows(&[&[lambda]]).unwrap(), 0.5).unwrap()
    }

    #[test]
    fn zero_field_has_no_density() {
        let t: Vec<Vec<f64>> = vec![vec![0.5], vec![1.0]];
        let r = density_sup_probe(&ProbeModel::Zero { d: 1, m: 1 }, &scalar_pair(0.5), 500, &t, 21, 0).unwrap();
        assert!(r.unbounded);
        assert!(r.max_density.is_infinite());
    }

    #[test]
    fn silverman_on_known_spread() {
        let mut v: Vec<f64> = (0..1001).map(|i| i as f64 / 1000.0).collect();
        let b = silverman(&mut v, 1);
        // sd of U(0,1) ≈ 0.2888, IQR/1.34 ≈ 0.373.
        assert!((b - 0.9 * 0.2888 * 1001f64.powf(-0.2)).abs() < 1e-3, "{b}");
    }

    #[test]
    fn rejects_time_zero() {
        let r = density_sup_probe(&ProbeModel::Zero { d: 1, m: 1 }, &scalar_pair(0.5), 500, &[vec![0.0]], 21, 0);
        assert!(r.is_err());
    }
}
