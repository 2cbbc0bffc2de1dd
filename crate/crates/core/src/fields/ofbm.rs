//! Gaussian operator fractional Brownian motion with `E = I_d`.
//!
//! `D = P·diag(h)·P⁻¹` with real `h_i ∈ (0,1)`; the field is `P` applied to
//! independent isotropic fractional Brownian fields with Hurst indices `h_i`,
//! which gives `X(ct) = c^D X(t)` in law. For `d = 1` each component is
//! synthesized exactly by circulant embedding of fractional Gaussian noise.
//! For `d = 2` each component is a truncated harmonizable sum
//!
//! `B(t) = Σ_k w_k·[(cos⟨t,ξ_k⟩ − 1)·Z_k + sin⟨t,ξ_k⟩·Z'_k]`,
//!
//! with log-spaced radii `|ξ_k|`, a randomly rotated angle grid per radius
//! and weights `w_k ∝ |ξ_k|^{−h}` on the log-polar cell. The truncation to
//! `[R_MIN, R_MAX·n]` loses variance at very coarse and sub-lattice scales.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{replica_rng, FieldPath, Model};
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

const RADII_PER_OCTAVE: usize = 4;
const ANGLES: usize = 24;
const R_MIN: f64 = 1.0 / 1024.0;
const R_MAX_PER_POINT: f64 = 8.0 * std::f64::consts::PI;

/// Splits `D` into `P` and real exponents `h`, requiring `h_i ∈ (0,1)`.
pub(crate) fn diagonalize(d: &SquareMatrix) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let m = d.order();
    let a = d.as_dmatrix();
    let is_diag = (0..m).all(|i| (0..m).all(|j| i == j || a[(i, j)] == 0.0));
    let (p, h) = if is_diag {
        (DMatrix::identity(m, m), (0..m).map(|i| a[(i, i)]).collect::<Vec<_>>())
    } else if m == 2 {
        let (tr, det) = (a[(0, 0)] + a[(1, 1)], a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]);
        let disc = tr * tr / 4.0 - det;
        if disc <= 1e-14 * (1.0 + tr * tr) {
            return Err(Error::Unsupported("exponent D is not real-diagonalizable with distinct eigenvalues".into()));
        }
        let h = [tr / 2.0 - disc.sqrt(), tr / 2.0 + disc.sqrt()];
        let mut p = DMatrix::zeros(2, 2);
        for (k, &mu) in h.iter().enumerate() {
            // Null vector of D − μI from whichever row is larger.
            let (r0, r1) = ([a[(0, 0)] - mu, a[(0, 1)]], [a[(1, 0)], a[(1, 1)] - mu]);
            let row = if r0[0].hypot(r0[1]) >= r1[0].hypot(r1[1]) { r0 } else { r1 };
            let v = [-row[1], row[0]];
            let norm = v[0].hypot(v[1]);
            p[(0, k)] = v[0] / norm;
            p[(1, k)] = v[1] / norm;
        }
        (p, h.to_vec())
    } else {
        return Err(Error::Unsupported(format!("non-diagonal exponent of order {m} is not supported")));
    };
    if let Some(bad) = h.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::Unsupported(format!("exponent eigenvalue {bad} outside (0, 1)")));
    }
    Ok((p, h))
}

/// Circulant embedding of unit-step fractional Gaussian noise; holds the
/// square-rooted, normalized eigenvalues and the FFT plan.
struct FgnGenerator {
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FgnGenerator {
    fn new(h: f64, len: usize) -> Result<Self> {
        let size = 2 * len;
        let gamma = |k: usize| {
            let k = k as f64;
            let e = 2.0 * h;
            0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
        };
        let mut row: Vec<Complex64> =
            (0..size).map(|j| Complex64::new(gamma(if j <= len { j } else { size - j }), 0.0)).collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut row);
        let mut sqrt_eig = Vec::with_capacity(size);
        for z in &row {
            if z.re < -1e-8 * row[0].re.abs().max(1.0) {
                return Err(Error::numeric(format!("circulant embedding not nonnegative (eigenvalue {})", z.re)));
            }
            sqrt_eig.push((z.re.max(0.0) / size as f64).sqrt());
        }
        Ok(FgnGenerator { sqrt_eig, fft })
    }

    fn sample(&self, rng: &mut impl Rng, out: &mut [f64]) {
        let mut buf: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                Complex64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
            })
            .collect();
        self.fft.process(&mut buf);
        for (o, z) in out.iter_mut().zip(&buf) {
            *o = z.re;
        }
    }
}

/// Standard fractional Brownian motion on `t_i = i/(n−1)`, written into
/// `out` (length `n`).
fn fbm_1d(gen: &FgnGenerator, h: f64, rng: &mut impl Rng, out: &mut [f64]) {
    let n = out.len();
    let mut noise = vec![0.0; n];
    gen.sample(rng, &mut noise);
    let step = (1.0 / (n - 1) as f64).powf(h);
    out[0] = 0.0;
    for i in 1..n {
        out[i] = out[i - 1] + step * noise[i - 1];
    }
}

/// Log-spaced radii and the normalizing constant making `Var B(e_1) = 1`.
struct SpectralGrid {
    radii: Vec<f64>,
    log_step: f64,
    norm: f64,
}

impl SpectralGrid {
    fn new(h: f64, n: usize) -> Self {
        let r_max = R_MAX_PER_POINT * n as f64;
        let log_step = std::f64::consts::LN_2 / RADII_PER_OCTAVE as f64;
        let count = ((r_max / R_MIN).ln() / log_step).ceil() as usize;
        let radii: Vec<f64> = (0..count).map(|j| R_MIN * ((j as f64 + 0.5) * log_step).exp()).collect();
        // Angular average of 2(1 − cos(r cos θ)) by a fine quadrature.
        let fine = 720;
        let var: f64 = radii
            .iter()
            .map(|&r| {
                let ang: f64 = (0..fine)
                    .map(|a| {
                        let th = (a as f64 + 0.5) * std::f64::consts::TAU / fine as f64;
                        2.0 * (1.0 - (r * th.cos()).cos())
                    })
                    .sum::<f64>()
                    / fine as f64;
                r.powf(-2.0 * h) * log_step * ang
            })
            .sum();
        SpectralGrid { radii, log_step, norm: var.sqrt() }
    }
}

/// Isotropic fractional Brownian field on the `n×n` lattice.
fn fbf_2d(grid: &SpectralGrid, h: f64, rng: &mut impl Rng, out: &mut [f64]) {
    let n = (out.len() as f64).sqrt().round() as usize;
    let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    out.fill(0.0);
    let dth = std::f64::consts::TAU / ANGLES as f64;
    let mut ax = vec![Complex64::new(0.0, 0.0); n];
    let mut ay = vec![Complex64::new(0.0, 0.0); n];
    for &r in &grid.radii {
        let w = (r.powf(-2.0 * h) * grid.log_step / ANGLES as f64).sqrt() / grid.norm;
        let offset: f64 = rng.random::<f64>() * dth;
        for a in 0..ANGLES {
            let th = offset + a as f64 * dth;
            let (xi1, xi2) = (r * th.cos(), r * th.sin());
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            for i in 0..n {
                ax[i] = Complex64::from_polar(1.0, xi1 * t[i]);
                ay[i] = Complex64::from_polar(1.0, xi2 * t[i]);
            }
            for i in 0..n {
                let row = &mut out[i * n..(i + 1) * n];
                for (j, o) in row.iter_mut().enumerate() {
                    let e = ax[i] * ay[j];
                    *o += w * ((e.re - 1.0) * z1 + e.im * z2);
                }
            }
        }
    }
}

enum Component {
    Line(FgnGenerator),
    Plane(SpectralGrid),
}

/// Operator fractional Brownian motion with exponent `D` on `[0,1]^d`.
/// `d ∈ {1, 2}`, `m = order(D) ∈ {1, 2}`, `n` a power of two.
pub fn simulate_ofbm(
    exponent: &SquareMatrix,
    d: usize,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<FieldPath>> {
    if !(1..=2).contains(&d) {
        return Err(Error::Unsupported(format!("parameter dimension d = {d}; only 1 and 2 are supported")));
    }
    let m = exponent.order();
    if m > 2 {
        return Err(Error::Unsupported(format!("value dimension m = {m}; only 1 and 2 are supported")));
    }
    if !n.is_power_of_two() || n < 4 {
        return Err(Error::input(format!("n = {n} must be a power of two, at least 4")));
    }
    if d == 2 && n > 1024 {
        return Err(Error::input("two-parameter lattices are limited to n ≤ 1024"));
    }
    let (p, h) = diagonalize(exponent)?;
    let comps: Vec<Component> = h
        .iter()
        .map(|&hi| {
            Ok(if d == 1 {
                Component::Line(FgnGenerator::new(hi, n)?)
            } else {
                Component::Plane(SpectralGrid::new(hi, n))
            })
        })
        .collect::<Result<_>>()?;
    let points = n.pow(d as u32);
    let model = Model::Ofbm { exponent: exponent.to_row_major() };
    (0..replicas as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replica_rng(seed, rep);
            let mut raw = vec![vec![0.0; points]; m];
            for (k, comp) in comps.iter().enumerate() {
                match comp {
                    Component::Line(gen) => fbm_1d(gen, h[k], &mut rng, &mut raw[k]),
                    Component::Plane(grid) => fbf_2d(grid, h[k], &mut rng, &mut raw[k]),
                }
            }
            let mut values = vec![0.0; points * m];
            for i in 0..points {
                for r in 0..m {
                    values[i * m + r] = (0..m).map(|k| p[(r, k)] * raw[k][i]).sum();
                }
            }
            // The spectral sum vanishes at 0 only up to rounding.
            values[..m].fill(0.0);
            FieldPath::new(d, m, n, values, model.clone(), seed, rep)
        })
        .collect()
}

/// Scalar fractional Brownian motion with Hurst index `h` on `[0,1]`.
pub fn simulate_fbm(h: f64, n: usize, replicas: usize, seed: u64) -> Result<Vec<FieldPath>> {
    simulate_ofbm(&SquareMatrix::from_rows(&[&[h]])?, 1, n, replicas, seed)
}
