//! Splitting `R^m` into `D`-invariant subspaces grouped by eigenvalue real part.
//!
//! The complex Schur form `D = Q T Q^H` is reordered with adjacent Givens
//! swaps so that the eigenvalues of one real-part cluster lead the diagonal;
//! the leading Schur vectors then span that cluster's invariant subspace.
//! Clusters are closed under conjugation, so the span has a real basis,
//! extracted from the real and imaginary parts of the Schur vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::spectrum::{eig_real_spectrum, schur};
use super::SquareMatrix;
use crate::error::{Error, Result};

/// One invariant subspace: an orthonormal real basis and the common real
/// part of the eigenvalues of `D` restricted to it.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    pub basis: Vec<Vec<f64>>,
    pub real_part: f64,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Blocks in strictly ascending order of real part.
    pub blocks: Vec<SpectralBlock>,
    /// Columns are the block bases, concatenated in block order.
    pub change_of_basis: SquareMatrix,
    /// `D` expressed in the adapted basis, with off-block entries dropped.
    pub block_diagonal: SquareMatrix,
}

impl SpectralDecomposition {
    /// The diagonal block `D_i` of block `i` in the adapted basis.
    pub fn block_matrix(&self, i: usize) -> SquareMatrix {
        let start: usize = self.blocks[..i].iter().map(|b| b.dim).sum();
        let dim = self.blocks[i].dim;
        let m = self.block_diagonal.as_dmatrix().view((start, start), (dim, dim)).into_owned();
        SquareMatrix::from_dmatrix(m).expect("sub-block of a finite matrix")
    }
}

fn swap_adjacent(t: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k, k + 1)];
    let c = t[(k + 1, k + 1)];
    let diff = c - a;
    let norm = (b.norm_sqr() + diff.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    // First column of G is the eigenvector of the 2x2 block for eigenvalue c.
    let g1 = b / norm;
    let g2 = diff / norm;
    for j in 0..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = g1.conj() * x + g2.conj() * y;
        t[(k + 1, j)] = -g2 * x + g1 * y;
    }
    for i in 0..n {
        let (x, y) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = x * g1 + y * g2;
        t[(i, k + 1)] = -x * g2.conj() + y * g1.conj();
        let (x, y) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = x * g1 + y * g2;
        q[(i, k + 1)] = -x * g2.conj() + y * g1.conj();
    }
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
}

/// Moves every diagonal entry labelled `target` to the front, keeping the
/// relative order of the others.
fn bring_to_front(t: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>, labels: &mut [usize], target: usize) {
    let n = labels.len();
    loop {
        let mut swapped = false;
        for k in 0..n - 1 {
            if labels[k] != target && labels[k + 1] == target {
                swap_adjacent(t, q, k);
                labels.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
}

fn nearest(centers: &[(f64, usize)], x: f64) -> usize {
    let mut best = 0;
    for (i, c) in centers.iter().enumerate() {
        if (c.0 - x).abs() < (centers[best].0 - x).abs() {
            best = i;
        }
    }
    best
}

/// Decomposes `R^m` into `D`-invariant subspaces, one per clustered
/// eigenvalue real part, ascending.
pub fn spectral_decomposition(d: &SquareMatrix, cluster_tol: f64) -> Result<SpectralDecomposition> {
    let m = d.order();
    let centers = eig_real_spectrum(d, cluster_tol)?;
    let advice = || {
        format!(
            "could not separate invariant subspaces with cluster tolerance {cluster_tol:e}; \
             eigenvalue real parts are too close, retry with a larger cluster tolerance"
        )
    };

    let complex = d.as_dmatrix().map(|v| Complex64::new(v, 0.0));
    let (q0, t0) = schur(&complex).ok_or_else(|| Error::numeric("complex Schur iteration did not converge"))?;

    let labels0: Vec<usize> = (0..m).map(|i| nearest(&centers, t0[(i, i)].re)).collect();
    for (i, c) in centers.iter().enumerate() {
        if labels0.iter().filter(|&&l| l == i).count() != c.1 {
            return Err(Error::numeric(advice()));
        }
    }

    let mut blocks = Vec::with_capacity(centers.len());
    let mut s = DMatrix::<f64>::zeros(m, m);
    let mut col = 0;
    for (idx, &(real_part, dim)) in centers.iter().enumerate() {
        let (mut t, mut q, mut labels) = (t0.clone(), q0.clone(), labels0.clone());
        bring_to_front(&mut t, &mut q, &mut labels, idx);

        let mut stacked = DMatrix::<f64>::zeros(m, 2 * dim);
        for j in 0..dim {
            for i in 0..m {
                stacked[(i, j)] = q[(i, j)].re;
                stacked[(i, dim + j)] = q[(i, j)].im;
            }
        }
        let svd = stacked.svd(true, false);
        let u = svd.u.ok_or_else(|| Error::numeric("SVD failed while extracting a real basis"))?;
        let sv = &svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        let lead = sv[order[0]];
        if sv[order[dim - 1]] < 1e-6 * lead || (order.len() > dim && sv[order[dim]] > 1e-6 * lead) {
            return Err(Error::numeric(advice()));
        }
        let basis: Vec<Vec<f64>> = order[..dim].iter().map(|&j| (0..m).map(|i| u[(i, j)]).collect()).collect();
        for v in &basis {
            for (i, x) in v.iter().enumerate() {
                s[(i, col)] = *x;
            }
            col += 1;
        }
        blocks.push(SpectralBlock { basis, real_part, dim });
    }

    let s_inv = s.clone().try_inverse().ok_or_else(|| Error::numeric(advice()))?;
    let mut block_diag = &s_inv * d.as_dmatrix() * &s;
    let mut start = 0;
    let mut owner = vec![0; m];
    for (b, block) in blocks.iter().enumerate() {
        for o in owner.iter_mut().skip(start).take(block.dim) {
            *o = b;
        }
        start += block.dim;
    }
    for i in 0..m {
        for j in 0..m {
            if owner[i] != owner[j] {
                block_diag[(i, j)] = 0.0;
            }
        }
    }
    let recon = &s * &block_diag * &s_inv;
    if (recon - d.as_dmatrix()).norm() > 1e-10 * d.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::numeric(advice()));
    }
    Ok(SpectralDecomposition {
        blocks,
        change_of_basis: SquareMatrix::from_dmatrix(s)?,
        block_diagonal: SquareMatrix::from_dmatrix(block_diag)?,
    })
}
