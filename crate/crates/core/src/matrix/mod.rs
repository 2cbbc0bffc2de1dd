//! Dense real-matrix services.
//!
//! Everything here works on small dense matrices in double precision
//! (orders up to about eight in practice). The matrix file format used by
//! the command line is a first line holding the order `n` followed by `n`
//! rows of `n` whitespace-separated decimals.

mod decompose;
mod expm;
mod polar;
pub(crate) mod power;
mod spectrum;

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use decompose::{spectral_decomposition, SpectralBlock, SpectralDecomposition};
pub use expm::{expm, matrix_power_scale, matrix_real_power};
pub use polar::{polar_coordinates, PolarCoordinates};
pub use power::{compound_matrix, log_norms_of_power, log_singular_values_power};
pub use spectrum::{
    cluster_real_parts, default_cluster_tol, eig_real_spectrum, eigenvalues, spectral_radius, spectrum_summary,
    SpectrumSummary,
};

/// A real square matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    /// Builds a matrix of the given order from row-major entries.
    pub fn from_row_major(order: usize, entries: &[f64]) -> Result<Self> {
        if order == 0 {
            return Err(Error::input("matrix order must be positive"));
        }
        if entries.len() != order * order {
            return Err(Error::input(format!(
                "matrix of order {order} needs {} entries, got {}",
                order * order,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(order, order, entries))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::input("matrix rows must all have length equal to the order"));
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(n, &entries)
    }

    pub fn from_dmatrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::input(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::input("matrix order must be positive"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        Ok(SquareMatrix(m))
    }

    pub fn identity(order: usize) -> Self {
        SquareMatrix(DMatrix::identity(order, order))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = *v;
        }
        Self::from_dmatrix(m)
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.order();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|ij| self.0[ij]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, factor: f64) -> SquareMatrix {
        SquareMatrix(&self.0 * factor)
    }

    pub fn transpose(&self) -> SquareMatrix {
        SquareMatrix(self.0.transpose())
    }

    pub fn mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.order() != other.order() {
            return Err(Error::input("matrix orders differ"));
        }
        Ok(SquareMatrix(&self.0 * &other.0))
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order();
        (0..n).map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum()).collect()
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &SquareMatrix) -> SquareMatrix {
        let (a, b) = (self.order(), other.order());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.0);
        m.view_mut((a, a), (b, b)).copy_from(&other.0);
        SquareMatrix(m)
    }

    /// Parses the plain-text matrix format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::input("empty matrix file"))?;
        let order: usize =
            header.parse().map_err(|_| Error::input(format!("first line must be the matrix order, got {header:?}")))?;
        let mut entries = Vec::with_capacity(order * order);
        let mut rows = 0;
        for line in lines {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|_| Error::input(format!("bad matrix entry {tok:?}"))))
                .collect::<Result<_>>()?;
            if row.len() != order {
                return Err(Error::input(format!(
                    "matrix row {} has {} entries, expected {order}",
                    rows + 1,
                    row.len()
                )));
            }
            entries.extend(row);
            rows += 1;
        }
        if rows != order {
            return Err(Error::input(format!("expected {order} matrix rows, got {rows}")));
        }
        Self::from_row_major(order, &entries)
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

impl fmt::Display for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.order();
        writeln!(f, "{n}")?;
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", self.0[(i, j)])).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Scaling exponents `E` (time, `d×d`) and `D` (space, `m×m`) together with a
/// scale `c ∈ (0,1)`; the field scales as `X(c^E t) = c^D X(t)` in law.
#[derive(Clone, Debug)]
pub struct ExponentPair {
    e: SquareMatrix,
    d: SquareMatrix,
    c: f64,
}

impl ExponentPair {
    /// Validates that `c ∈ (0,1)` and that all eigenvalues of `E` and `D`
    /// have strictly positive real part.
    pub fn new(e: SquareMatrix, d: SquareMatrix, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::domain(format!("scale c = {c} must lie in (0,1)")));
        }
        for (name, m) in [("E", &e), ("D", &d)] {
            let eig = eigenvalues(m)?;
            if let Some(z) = eig.iter().find(|z| z.re <= 0.0) {
                return Err(Error::domain(format!(
                    "{name} has an eigenvalue {z} with nonpositive real part; c^{name} is not contracting"
                )));
            }
        }
        Ok(ExponentPair { e, d, c })
    }

    pub fn e(&self) -> &SquareMatrix {
        &self.e
    }

    pub fn d(&self) -> &SquareMatrix {
        &self.d
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        ExponentPair::new(self.e.clone(), self.d.clone(), c)
    }

    /// Parameter dimension `d`.
    pub fn time_dim(&self) -> usize {
        self.e.order()
    }

    /// Value dimension `m`.
    pub fn space_dim(&self) -> usize {
        self.d.order()
    }

    pub fn q(&self) -> f64 {
        self.e.trace()
    }

    /// `U = c^E`.
    pub fn u(&self) -> Result<SquareMatrix> {
        matrix_power_scale(&self.e, self.c)
    }

    /// `V = c^D`.
    pub fn v(&self) -> Result<SquareMatrix> {
        matrix_power_scale(&self.d, self.c)
    }

    /// `W = c^E ⊕ c^D = c^{E⊕D}`.
    pub fn w(&self) -> Result<SquareMatrix> {
        Ok(self.u()?.direct_sum(&self.v()?))
    }

    /// `det U = c^q`.
    pub fn det_u(&self) -> f64 {
        self.c.powf(self.q())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let m = SquareMatrix::from_rows(&[&[1.0, -0.25], &[3.5e-3, 2.0]]).unwrap();
        let back = SquareMatrix::parse(&m.to_string()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(matches!(SquareMatrix::parse("2\n1 0\n0\n"), Err(Error::Input(_))));
        assert!(matches!(SquareMatrix::parse("2\n1 0\n"), Err(Error::Input(_))));
        assert!(matches!(SquareMatrix::parse("x\n"), Err(Error::Input(_))));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        assert!(SquareMatrix::from_row_major(1, &[f64::NAN]).is_err());
        assert!(SquareMatrix::from_row_major(2, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn exponent_pair_validation() {
        let e = SquareMatrix::identity(1);
        let d = SquareMatrix::diagonal(&[0.5]).unwrap();
        assert!(ExponentPair::new(e.clone(), d.clone(), 0.5).is_ok());
        assert!(matches!(ExponentPair::new(e.clone(), d.clone(), 1.0), Err(Error::Domain(_))));
        let bad = SquareMatrix::diagonal(&[0.5, -0.1]).unwrap();
        assert!(matches!(ExponentPair::new(e, bad, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn det_u_matches_determinant() {
        let e = SquareMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.5]]).unwrap();
        let pair = ExponentPair::new(e, SquareMatrix::identity(1), 0.3).unwrap();
        let det = pair.u().unwrap().as_dmatrix().determinant();
        assert!((det - pair.det_u()).abs() < 1e-14);
    }
}
