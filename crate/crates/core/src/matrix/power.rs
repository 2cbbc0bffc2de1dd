//! Log-domain singular values of large matrix powers.
//!
//! `W^k` underflows long before the limits we care about are reached, so it
//! is never formed. Instead, the sum of the `j` largest log singular values
//! of `W^k` is read off as `ln ‖Λ^j(W)^k‖₂`, the log spectral norm of a power
//! of the `j`-th compound matrix (`Λ^j(AB) = Λ^j(A)Λ^j(B)` by Cauchy–Binet).
//! Powers are accumulated by binary exponentiation on matrices kept at unit
//! Frobenius norm, with the discarded scale carried as a logarithm.
//!
//! Cost is `O(log k · C(n, j)³)` per compound, independent of `k` otherwise.

use nalgebra::DMatrix;

use super::SquareMatrix;
use crate::error::{Error, Result};

/// `e^{log_scale} · unit`, with `‖unit‖_F = 1`.
#[derive(Clone, Debug)]
struct Scaled {
    log_scale: f64,
    unit: DMatrix<f64>,
}

impl Scaled {
    fn new(m: DMatrix<f64>) -> Result<Self> {
        let norm = m.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::domain("matrix power degenerated (zero or non-finite product)"));
        }
        Ok(Scaled { log_scale: norm.ln(), unit: m / norm })
    }

    fn mul(&self, other: &Scaled) -> Result<Scaled> {
        let mut s = Scaled::new(&self.unit * &other.unit)?;
        s.log_scale += self.log_scale + other.log_scale;
        Ok(s)
    }

    fn log_spectral_norm(&self) -> f64 {
        let top = self.unit.singular_values().iter().copied().fold(0.0, f64::max);
        self.log_scale + top.ln()
    }
}

fn combinations(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..j).collect();
    loop {
        out.push(idx.clone());
        let mut i = j;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - j {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for k in i + 1..j {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

/// The `j`-th compound (exterior power) matrix: all `j×j` minors of `w`,
/// rows and columns indexed by lexicographically ordered `j`-subsets.
pub fn compound_matrix(w: &DMatrix<f64>, j: usize) -> DMatrix<f64> {
    let n = w.nrows();
    assert!(j >= 1 && j <= n, "compound order {j} out of range for order {n}");
    let subsets = combinations(n, j);
    let size = subsets.len();
    let mut out = DMatrix::zeros(size, size);
    let mut minor = DMatrix::zeros(j, j);
    for (r, rows) in subsets.iter().enumerate() {
        for (c, cols) in subsets.iter().enumerate() {
            for (a, &ri) in rows.iter().enumerate() {
                for (b, &ci) in cols.iter().enumerate() {
                    minor[(a, b)] = w[(ri, ci)];
                }
            }
            out[(r, c)] = minor.clone().determinant();
        }
    }
    out
}

fn scaled_power(base: &Scaled, mut k: u64) -> Result<Scaled> {
    let mut acc: Option<Scaled> = None;
    let mut sq = base.clone();
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => a.mul(&sq)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        sq = sq.mul(&sq)?;
    }
    Ok(acc.expect("k >= 1"))
}

fn check_nonsingular(w: &SquareMatrix) -> Result<()> {
    let sv = w.as_dmatrix().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || min < 1e-14 * max {
        return Err(Error::domain(format!("matrix is singular (smallest singular value {min:e}, largest {max:e})")));
    }
    Ok(())
}

/// `ln ‖Λ^j(W)^k‖₂` for `j = 1..=n`, i.e. the partial sums of the log
/// singular values of `W^k` taken in descending order.
pub fn log_norms_of_power(w: &SquareMatrix, k: u64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::domain("power k must be positive"));
    }
    check_nonsingular(w)?;
    let n = w.order();
    (1..=n)
        .map(|j| {
            let base = Scaled::new(compound_matrix(w.as_dmatrix(), j))?;
            Ok(scaled_power(&base, k)?.log_spectral_norm())
        })
        .collect()
}

/// `ln ‖Λ^j(W)^{2^i}‖₂` for `i = 0..=max_doublings`, by repeated squaring.
pub(crate) fn log_norms_doubling(w: &SquareMatrix, j: usize, max_doublings: u32) -> Result<Vec<f64>> {
    let mut cur = Scaled::new(compound_matrix(w.as_dmatrix(), j))?;
    let mut out = Vec::with_capacity(max_doublings as usize + 1);
    out.push(cur.log_spectral_norm());
    for _ in 0..max_doublings {
        cur = cur.mul(&cur)?;
        out.push(cur.log_spectral_norm());
    }
    Ok(out)
}

pub(crate) fn ensure_nonsingular(w: &SquareMatrix) -> Result<()> {
    check_nonsingular(w)
}

/// Ascending per-step log singular values `(1/k)·ln σ_i(W^k)`.
pub fn log_singular_values_power(w: &SquareMatrix, k: u64) -> Result<Vec<f64>> {
    let partial = log_norms_of_power(w, k)?;
    let mut out: Vec<f64> =
        partial.iter().enumerate().map(|(j, l)| (l - if j == 0 { 0.0 } else { partial[j - 1] }) / k as f64).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matrix_power_scale;

    #[test]
    fn combinations_enumerate_subsets() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 1), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(combinations(4, 2)[5], vec![2, 3]);
    }

    #[test]
    fn compound_is_multiplicative() {
        let a = DMatrix::from_row_slice(3, 3, &[0.3, -1.0, 0.2, 0.5, 0.4, 0.9, -0.7, 0.1, 0.6]);
        let b = DMatrix::from_row_slice(3, 3, &[1.1, 0.2, 0.0, -0.3, 0.8, 0.4, 0.5, 0.5, -0.2]);
        for j in 1..=3 {
            let lhs = compound_matrix(&(&a * &b), j);
            let rhs = compound_matrix(&a, j) * compound_matrix(&b, j);
            assert!((lhs - rhs).abs().max() < 1e-14);
        }
    }

    #[test]
    fn diagonal_powers() {
        let w = SquareMatrix::diagonal(&[0.5, 0.25]).unwrap();
        for k in [1, 7, 1000, 1 << 30] {
            let v = log_singular_values_power(&w, k).unwrap();
            assert!((v[0] - 0.25f64.ln()).abs() < 1e-12, "k={k}: {v:?}");
            assert!((v[1] - 0.5f64.ln()).abs() < 1e-12, "k={k}: {v:?}");
        }
    }

    #[test]
    fn scaled_rotation() {
        let th = 0.9f64;
        let w =
            SquareMatrix::from_rows(&[&[0.3 * th.cos(), -0.3 * th.sin()], &[0.3 * th.sin(), 0.3 * th.cos()]]).unwrap();
        for k in [1, 3, 5000] {
            let v = log_singular_values_power(&w, k).unwrap();
            assert!(v.iter().all(|x| (x - 0.3f64.ln()).abs() < 1e-12), "{v:?}");
        }
    }

    #[test]
    fn matches_direct_svd_at_moderate_power() {
        let w = SquareMatrix::from_rows(&[&[0.6, 0.3, -0.1], &[0.05, 0.4, 0.2], &[0.1, -0.2, 0.7]]).unwrap();
        let k = 20u64;
        let mut p = DMatrix::<f64>::identity(3, 3);
        for _ in 0..k {
            p = &p * w.as_dmatrix();
        }
        let mut direct: Vec<f64> = p.singular_values().iter().map(|s| s.ln() / k as f64).collect();
        direct.sort_by(f64::total_cmp);
        let got = log_singular_values_power(&w, k).unwrap();
        for (g, d) in got.iter().zip(&direct) {
            assert!((g - d).abs() < 1e-10, "{got:?} vs {direct:?}");
        }
    }

    #[test]
    fn jordan_block_converges_to_log_c() {
        let e = SquareMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let w = matrix_power_scale(&e, 0.5).unwrap();
        let v = log_singular_values_power(&w, 4096).unwrap();
        for x in v {
            assert!((x - 0.5f64.ln()).abs() < 0.01, "{x}");
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let w = SquareMatrix::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(matches!(log_singular_values_power(&w, 3), Err(Error::Domain(_))));
    }
}
