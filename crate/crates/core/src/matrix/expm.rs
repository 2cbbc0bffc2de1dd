//! Matrix exponential by scaling and squaring with a diagonal Padé core.

use nalgebra::DMatrix;

use super::SquareMatrix;
use crate::error::{Error, Result};

// 1-norm bounds below which the [m/m] Padé approximant is accurate to
// double precision without scaling.
const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.53939833006323e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn pade_low(a: &DMatrix<f64>, b: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut even = DMatrix::identity(n, n) * b[0];
    let mut odd = DMatrix::identity(n, n) * b[1];
    let mut p = DMatrix::identity(n, n);
    for k in 1..b.len() / 2 {
        p = &p * &a2;
        even += &p * b[2 * k];
        odd += &p * b[2 * k + 1];
    }
    (a * odd, even)
}

fn pade_13(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    (u, v)
}

fn expm_dense(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let norm = one_norm(a);
    let solve = |u: DMatrix<f64>, v: DMatrix<f64>| -> Result<DMatrix<f64>> {
        let p = &v + &u;
        let q = v - u;
        q.lu().solve(&p).ok_or_else(|| Error::numeric("singular Padé denominator in matrix exponential"))
    };
    for (m, theta) in THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, b);
            return solve(u, v);
        }
    }
    let squarings = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a * 2f64.powi(-squarings);
    let (u, v) = pade_13(&scaled);
    let mut r = solve(u, v)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Matrix exponential `exp(A)`.
pub fn expm(a: &SquareMatrix) -> Result<SquareMatrix> {
    let r = expm_dense(a.as_dmatrix())?;
    SquareMatrix::from_dmatrix(r).map_err(|_| Error::numeric("matrix exponential overflowed"))
}

/// `r^E = exp(ln(r)·E)` for any `r > 0`.
pub fn matrix_real_power(e: &SquareMatrix, r: f64) -> Result<SquareMatrix> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("matrix power base {r} must be positive and finite")));
    }
    expm(&e.scale(r.ln()))
}

/// `c^E` for a scale `c ∈ (0,1)`.
pub fn matrix_power_scale(e: &SquareMatrix, c: f64) -> Result<SquareMatrix> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::domain(format!("scale c = {c} must lie in (0,1)")));
    }
    matrix_real_power(e, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &SquareMatrix, b: &DMatrix<f64>) -> f64 {
        (a.as_dmatrix() - b).abs().max()
    }

    // Plain Taylor series, summed until terms vanish; only used on small norms.
    fn taylor_oracle(a: &DMatrix<f64>) -> DMatrix<f64> {
        let n = a.nrows();
        let mut sum = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..60 {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn identity_exponent_gives_scalar() {
        let r = matrix_power_scale(&SquareMatrix::identity(2), 0.5).unwrap();
        assert!(max_diff(&r, &(DMatrix::identity(2, 2) * 0.5)) < 1e-15);
    }

    #[test]
    fn diagonal_exponent() {
        let e = SquareMatrix::diagonal(&[1.0, 2.0]).unwrap();
        let r = matrix_power_scale(&e, 0.5).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        assert!(max_diff(&r, &expected) < 1e-15);
    }

    #[test]
    fn jordan_block_closed_form() {
        // exp(-J) for J = [[1,1],[0,1]] is e^{-1}[[1,-1],[0,1]].
        let e = SquareMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let r = matrix_power_scale(&e, (-1f64).exp()).unwrap();
        let inv_e = (-1f64).exp();
        let expected = DMatrix::from_row_slice(2, 2, &[inv_e, -inv_e, 0.0, inv_e]);
        assert!(max_diff(&r, &expected) < 1e-15);
    }

    #[test]
    fn agrees_with_taylor_on_every_pade_degree() {
        let base = DMatrix::from_row_slice(3, 3, &[0.3, -1.2, 0.5, 0.9, 0.1, -0.4, 0.2, 0.7, -0.6]);
        for scale in [1e-3, 0.05, 0.2, 0.5, 1.0, 2.0] {
            let a = &base * scale;
            let r = expm(&SquareMatrix::from_dmatrix(a.clone()).unwrap()).unwrap();
            let oracle = taylor_oracle(&a);
            assert!(max_diff(&r, &oracle) < 1e-13 * oracle.norm(), "scale {scale}");
        }
    }

    #[test]
    fn large_norm_uses_squaring() {
        // exp of a rotation generator: [[0,-θ],[θ,0]] -> rotation by θ.
        let theta = 20.0;
        let a = SquareMatrix::from_rows(&[&[0.0, -theta], &[theta, 0.0]]).unwrap();
        let r = expm(&a).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        assert!(max_diff(&r, &expected) < 1e-12);
    }

    #[test]
    fn semigroup_property() {
        let e = SquareMatrix::from_rows(&[&[0.8, 0.3, 0.0], &[-0.2, 1.1, 0.5], &[0.0, 0.1, 1.7]]).unwrap();
        let (c1, c2) = (0.37, 0.81);
        let lhs = matrix_power_scale(&e, c1).unwrap().mul(&matrix_power_scale(&e, c2).unwrap()).unwrap();
        let rhs = matrix_power_scale(&e, c1 * c2).unwrap();
        assert!(max_diff(&lhs, rhs.as_dmatrix()) < 1e-14);
    }

    #[test]
    fn rejects_bad_scale() {
        let e = SquareMatrix::identity(1);
        assert!(matches!(matrix_power_scale(&e, 0.0), Err(Error::Domain(_))));
        assert!(matches!(matrix_power_scale(&e, 1.5), Err(Error::Domain(_))));
    }
}
