//! Generalized polar coordinates `t = ρ^E l` with respect to a matrix `E`
//! whose eigenvalues have positive real parts.
//!
//! The radius is measured in an `E`-adapted Euclidean norm `‖x‖_P² = xᵀPx`
//! chosen so that `r ↦ ‖r^{-E} t‖_P` is strictly decreasing: `P = I` when
//! `E + Eᵀ` is positive definite, otherwise the solution of the Lyapunov
//! equation `EᵀP + PE = 2I`. In both cases `d/dr ‖r^{-E}t‖_P² < 0`, so the
//! radius is unique and bisection finds it. The unit sphere `S_E` is the
//! `P`-unit sphere.

use nalgebra::DMatrix;

use super::expm::matrix_real_power;
use super::spectrum::eigenvalues;
use super::SquareMatrix;
use crate::error::{Error, Result};

const MAX_BRACKET_STEPS: usize = 80;
const MAX_BISECTIONS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct PolarCoordinates {
    pub radius: f64,
    pub direction: Vec<f64>,
}

/// Precomputed adapted norm for a fixed exponent `E`.
#[derive(Clone, Debug)]
pub struct PolarFrame {
    e: SquareMatrix,
    gram: Option<DMatrix<f64>>,
}

fn lyapunov_gram(e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = e.nrows();
    let et = e.transpose();
    let id = DMatrix::<f64>::identity(n, n);
    let op = id.kronecker(&et) + et.kronecker(&id);
    let rhs = DMatrix::<f64>::identity(n, n) * 2.0;
    let rhs = nalgebra::DVector::from_column_slice(rhs.as_slice());
    let sol =
        op.lu().solve(&rhs).ok_or_else(|| Error::numeric("Lyapunov equation for the adapted norm is singular"))?;
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    let p = (&p + p.transpose()) * 0.5;
    if p.clone().cholesky().is_none() {
        return Err(Error::numeric("adapted norm Gram matrix is not positive definite"));
    }
    Ok(p)
}

impl PolarFrame {
    pub fn new(e: &SquareMatrix) -> Result<Self> {
        if let Some(z) = eigenvalues(e)?.into_iter().find(|z| z.re <= 0.0) {
            return Err(Error::domain(format!(
                "polar coordinates need eigenvalues with positive real part, found {z}"
            )));
        }
        let sym = e.as_dmatrix() + e.as_dmatrix().transpose();
        let gram = if sym.cholesky().is_some() { None } else { Some(lyapunov_gram(e.as_dmatrix())?) };
        Ok(PolarFrame { e: e.clone(), gram })
    }

    /// The adapted norm `‖x‖_P`.
    pub fn norm(&self, x: &[f64]) -> f64 {
        match &self.gram {
            None => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Some(p) => {
                let n = x.len();
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += x[i] * p[(i, j)] * x[j];
                    }
                }
                acc.max(0.0).sqrt()
            }
        }
    }

    fn scaled(&self, log_r: f64, t: &[f64]) -> Result<Vec<f64>> {
        Ok(matrix_real_power(&self.e, (-log_r).exp())?.apply(t))
    }

    pub fn decompose(&self, t: &[f64]) -> Result<PolarCoordinates> {
        if t.len() != self.e.order() {
            return Err(Error::input(format!("vector has length {}, expected {}", t.len(), self.e.order())));
        }
        if t.iter().all(|v| *v == 0.0) {
            return Err(Error::domain("polar coordinates are undefined at the origin"));
        }
        let f = |u: f64| -> Result<f64> { Ok(self.norm(&self.scaled(u, t)?)) };
        let bracket_error = || Error::numeric("could not bracket the polar radius");

        // f is strictly decreasing in u = ln r; find f(lo) > 1 > f(hi).
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut steps = 0;
        while f(lo)? <= 1.0 {
            lo = 2.0 * lo - 1.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !lo.is_finite() {
                return Err(bracket_error());
            }
        }
        steps = 0;
        while f(hi)? >= 1.0 {
            hi = 2.0 * hi + 1.0;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(bracket_error());
            }
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid)? > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = 0.5 * (lo + hi);
        Ok(PolarCoordinates { radius: u.exp(), direction: self.scaled(u, t)? })
    }
}

/// Generalized polar coordinates of `t ≠ 0` with respect to `E`.
pub fn polar_coordinates(e: &SquareMatrix, t: &[f64]) -> Result<PolarCoordinates> {
    PolarFrame::new(e)?.decompose(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_case() {
        let p = polar_coordinates(&SquareMatrix::identity(2), &[3.0, 4.0]).unwrap();
        assert!((p.radius - 5.0).abs() < 1e-13);
        assert!((p.direction[0] - 0.6).abs() < 1e-13);
        assert!((p.direction[1] - 0.8).abs() < 1e-13);
    }

    #[test]
    fn anisotropic_axis() {
        let e = SquareMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let p = polar_coordinates(&e, &[0.0, 4.0]).unwrap();
        assert!((p.radius - 2.0).abs() < 1e-13);
        assert!(p.direction[0].abs() < 1e-15);
        assert!((p.direction[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn origin_is_rejected() {
        let r = polar_coordinates(&SquareMatrix::identity(2), &[0.0, 0.0]);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn non_normal_exponent_uses_lyapunov_norm() {
        // Symmetric part of this Jordan-like block is indefinite.
        let e = SquareMatrix::from_rows(&[&[1.0, 5.0], &[0.0, 1.0]]).unwrap();
        let frame = PolarFrame::new(&e).unwrap();
        assert!(frame.gram.is_some());
        let t = [0.3, -2.0];
        let p = frame.decompose(&t).unwrap();
        assert!((frame.norm(&p.direction) - 1.0).abs() < 1e-12);
        let back = matrix_real_power(&e, p.radius).unwrap().apply(&p.direction);
        let err: f64 = back.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-10 * 2.0f64.hypot(0.3));
    }

    #[test]
    fn homogeneity() {
        let e = SquareMatrix::from_rows(&[&[1.2, 0.7], &[-0.4, 0.9]]).unwrap();
        let t = [0.5, 1.5];
        let base = polar_coordinates(&e, &t).unwrap();
        let c = 0.3;
        let ct = matrix_real_power(&e, c).unwrap().apply(&t);
        let scaled = polar_coordinates(&e, &ct).unwrap();
        assert!((scaled.radius - c * base.radius).abs() < 1e-10 * base.radius);
    }
}
