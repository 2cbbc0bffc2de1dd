use nalgebra::linalg::Schur;
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use super::{ExponentPair, SquareMatrix};
use crate::error::{Error, Result};

const SCHUR_MAX_ITER: usize = 100_000;
const SCHUR_RESTARTS: usize = 4;

/// Schur form `M = Q T Qᴴ`, as `(Q, T)`.
///
/// The shifted QR iteration can cycle on some inputs. It is then restarted on
/// `P M P` for fixed Householder reflections `P`, and `Q` is mapped back.
pub(crate) fn schur<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Option<(DMatrix<T>, DMatrix<T>)> {
    let n = m.nrows();
    for attempt in 0..=SCHUR_RESTARTS {
        if attempt == 0 {
            if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
                return Some(s.unpack());
            }
            continue;
        }
        let v: Vec<f64> = (0..n).map(|j| 1.0 + ((attempt * (j + 3)) % 7) as f64 * 0.37).collect();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let p = DMatrix::<f64>::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / vv)
            .map(T::from_real);
        if let Some(s) = Schur::try_new(&p * m * &p, f64::EPSILON, SCHUR_MAX_ITER) {
            let (q, t) = s.unpack();
            return Some((&p * q, t));
        }
    }
    None
}

/// Default clustering tolerance `1e-9·(1 + ‖M‖)`.
pub fn default_cluster_tol(m: &SquareMatrix) -> f64 {
    1e-9 * (1.0 + m.norm())
}

/// Eigenvalues of a real quasi-triangular Schur factor, read off its 1×1
/// and 2×2 diagonal blocks.
fn real_schur_eigenvalues(t: &DMatrix<f64>) -> Vec<Complex64> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mean = 0.5 * (a + d);
            let disc = Complex64::new(0.25 * (a - d) * (a - d) + b * c, 0.0).sqrt();
            out.push(mean + disc);
            out.push(mean - disc);
            i += 2;
        } else {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// All (complex) eigenvalues, in Schur order.
pub fn eigenvalues(m: &SquareMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(m.as_dmatrix()).ok_or_else(|| {
        Error::numeric(format!(
            "real Schur iteration did not converge for a matrix of order {} (norm {:.3e})",
            m.order(),
            m.norm()
        ))
    })?;
    Ok(real_schur_eigenvalues(&t))
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &SquareMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Groups values into clusters by single linkage: after sorting, consecutive
/// values at most `tol` apart share a cluster. Returns, for each input value,
/// its cluster index, together with the ascending cluster centers (means).
pub fn cluster_real_parts(values: &[f64], tol: f64) -> (Vec<usize>, Vec<(f64, usize)>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut labels = vec![0; values.len()];
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &idx in &order {
        let v = values[idx];
        if clusters.is_empty() || v - prev > tol {
            if let Some(last) = clusters.last_mut() {
                last.0 = sum / last.1 as f64;
            }
            clusters.push((0.0, 0));
            sum = 0.0;
        }
        let last = clusters.last_mut().expect("cluster pushed above");
        last.1 += 1;
        sum += v;
        labels[idx] = clusters.len() - 1;
        prev = v;
    }
    if let Some(last) = clusters.last_mut() {
        last.0 = sum / last.1 as f64;
    }
    (labels, clusters)
}

/// Ascending distinct real parts of the eigenvalues of `m` with multiplicities,
/// after merging real parts that lie within `cluster_tol` of each other.
pub fn eig_real_spectrum(m: &SquareMatrix, cluster_tol: f64) -> Result<Vec<(f64, usize)>> {
    if !(cluster_tol > 0.0) {
        return Err(Error::domain("cluster tolerance must be positive"));
    }
    let re: Vec<f64> = eigenvalues(m)?.iter().map(|z| z.re).collect();
    Ok(cluster_real_parts(&re, cluster_tol).1)
}

/// Eigenvalue real-part data of an exponent pair.
///
/// `a` and `lambda` hold ascending distinct real parts with multiplicities
/// for `E` and `D`; `gamma` is their merged, multiplicity-expanded union in
/// ascending order and `q = trace(E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSummary {
    pub a: Vec<(f64, usize)>,
    pub lambda: Vec<(f64, usize)>,
    pub gamma: Vec<f64>,
    pub q: f64,
}

fn check_distinct(name: &str, parts: &[(f64, usize)]) -> Result<()> {
    if parts.is_empty() {
        return Err(Error::domain(format!("{name} spectrum is empty")));
    }
    for (i, &(v, mult)) in parts.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::domain(format!("{name} has real part {v}; all real parts must be strictly positive")));
        }
        if mult == 0 {
            return Err(Error::domain(format!("{name} has a zero multiplicity")));
        }
        if i > 0 && parts[i - 1].0 >= v {
            return Err(Error::domain(format!("{name} real parts must be strictly ascending")));
        }
    }
    Ok(())
}

fn group_values(values: &[f64]) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

fn expand(parts: &[(f64, usize)]) -> impl Iterator<Item = f64> + '_ {
    parts.iter().flat_map(|&(v, k)| std::iter::repeat_n(v, k))
}

impl SpectrumSummary {
    /// Builds a summary from distinct real parts with multiplicities; `q` is
    /// the multiplicity-weighted sum of `a`.
    pub fn from_parts(a: Vec<(f64, usize)>, lambda: Vec<(f64, usize)>) -> Result<Self> {
        let q = a.iter().map(|&(v, k)| v * k as f64).sum();
        Self::with_trace(a, lambda, q)
    }

    /// Builds a summary from multiplicity-expanded lists (exactly equal values
    /// are merged).
    pub fn from_values(a: &[f64], lambda: &[f64]) -> Result<Self> {
        Self::from_parts(group_values(a), group_values(lambda))
    }

    fn with_trace(a: Vec<(f64, usize)>, lambda: Vec<(f64, usize)>, q: f64) -> Result<Self> {
        check_distinct("E", &a)?;
        check_distinct("D", &lambda)?;
        let mut gamma: Vec<f64> = expand(&a).chain(expand(&lambda)).collect();
        gamma.sort_by(f64::total_cmp);
        Ok(SpectrumSummary { a, lambda, gamma, q })
    }

    /// Parameter dimension `d`.
    pub fn time_dim(&self) -> usize {
        self.a.iter().map(|p| p.1).sum()
    }

    /// Value dimension `m`.
    pub fn space_dim(&self) -> usize {
        self.lambda.iter().map(|p| p.1).sum()
    }

    /// Multiplicity-expanded ascending real parts of `E`.
    pub fn a_expanded(&self) -> Vec<f64> {
        expand(&self.a).collect()
    }

    /// Multiplicity-expanded ascending real parts of `D`.
    pub fn lambda_expanded(&self) -> Vec<f64> {
        expand(&self.lambda).collect()
    }
}

/// Spectral summary of an exponent pair; `q` is taken as `trace(E)`.
pub fn spectrum_summary(pair: &ExponentPair, cluster_tol: f64) -> Result<SpectrumSummary> {
    let a = eig_real_spectrum(pair.e(), cluster_tol)?;
    let lambda = eig_real_spectrum(pair.d(), cluster_tol)?;
    SpectrumSummary::with_trace(a, lambda, pair.q())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: &[(f64, usize)], want: &[(f64, usize)]) -> bool {
        got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g.0 - w.0).abs() < 1e-12 && g.1 == w.1)
    }

    #[test]
    fn diagonal_with_repeat() {
        let m = SquareMatrix::diagonal(&[0.5, 0.8, 0.5]).unwrap();
        let s = eig_real_spectrum(&m, default_cluster_tol(&m)).unwrap();
        assert!(close(&s, &[(0.5, 2), (0.8, 1)]), "{s:?}");
    }

    #[test]
    fn rotation_block_shares_real_part() {
        let m = SquareMatrix::from_rows(&[&[0.6, -0.4], &[0.4, 0.6]]).unwrap();
        let s = eig_real_spectrum(&m, default_cluster_tol(&m)).unwrap();
        assert!(close(&s, &[(0.6, 2)]), "{s:?}");
    }

    #[test]
    fn identity_has_one_cluster() {
        let m = SquareMatrix::identity(3);
        let s = eig_real_spectrum(&m, default_cluster_tol(&m)).unwrap();
        assert!(close(&s, &[(1.0, 3)]));
    }

    #[test]
    fn cluster_tol_must_be_positive() {
        assert!(eig_real_spectrum(&SquareMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn single_linkage_clustering() {
        let (labels, clusters) = cluster_real_parts(&[3.0, 1.0, 1.05, 2.0, 1.1], 0.06);
        assert_eq!(labels, vec![2, 0, 0, 1, 0]);
        assert_eq!(clusters.len(), 3);
        assert!((clusters[0].0 - 1.05).abs() < 1e-15 && clusters[0].1 == 3);
    }

    fn pair(e: SquareMatrix, d: SquareMatrix) -> ExponentPair {
        ExponentPair::new(e, d, 0.5).unwrap()
    }

    #[test]
    fn summary_scalars() {
        let p = pair(SquareMatrix::identity(1), SquareMatrix::diagonal(&[0.5]).unwrap());
        let s = spectrum_summary(&p, 1e-9).unwrap();
        assert_eq!(s.a, vec![(1.0, 1)]);
        assert_eq!(s.lambda, vec![(0.5, 1)]);
        assert_eq!(s.gamma, vec![0.5, 1.0]);
        assert_eq!(s.q, 1.0);
    }

    #[test]
    fn summary_diagonal() {
        let p = pair(SquareMatrix::diagonal(&[1.0, 3.0]).unwrap(), SquareMatrix::diagonal(&[0.5]).unwrap());
        let s = spectrum_summary(&p, 1e-9).unwrap();
        assert_eq!(s.gamma, vec![0.5, 1.0, 3.0]);
        assert_eq!(s.q, 4.0);
    }

    #[test]
    fn summary_jordan_block() {
        let e = SquareMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let p = pair(e, SquareMatrix::diagonal(&[0.7]).unwrap());
        let s = spectrum_summary(&p, 1e-9).unwrap();
        assert_eq!(s.a, vec![(1.0, 2)]);
        assert_eq!(s.gamma, vec![0.7, 1.0, 1.0]);
        assert_eq!(s.q, 2.0);
        let weighted: f64 = s.a.iter().map(|&(v, k)| v * k as f64).sum();
        assert!((weighted - s.q).abs() < 1e-12);
    }

    #[test]
    fn from_parts_validation() {
        assert!(SpectrumSummary::from_parts(vec![(1.0, 1)], vec![(-0.5, 1)]).is_err());
        assert!(SpectrumSummary::from_parts(vec![(1.0, 1)], vec![(0.8, 1), (0.5, 1)]).is_err());
        assert!(SpectrumSummary::from_parts(vec![(1.0, 0)], vec![(0.5, 1)]).is_err());
        let s = SpectrumSummary::from_values(&[2.0, 1.5], &[0.7, 0.5, 0.7]).unwrap();
        assert_eq!(s.a, vec![(1.5, 1), (2.0, 1)]);
        assert_eq!(s.lambda, vec![(0.5, 1), (0.7, 2)]);
        assert_eq!(s.q, 3.5);
        assert_eq!(s.space_dim(), 3);
    }

    #[test]
    fn shifted_qr_cycle_is_restarted() {
        // nalgebra's QR iteration cycles on this matrix.
        let m = SquareMatrix::from_rows(&[
            &[2.5373677981723293, -3.317_158_162_112_013e-2, 4.5767164193574184e-1],
            &[5.5895974818494946e-2, 2.240_926_358_024_33, -3.0765576466735145e-1],
            &[-6.509_940_393_143_587e-1, -3.0740701518320385e-1, 5.112_687_475_824_531e-1],
        ])
        .unwrap();
        let mut eig = eigenvalues(&m).unwrap();
        eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let trace: f64 = (0..3).map(|i| m.get(i, i)).sum();
        assert!((eig.iter().map(|z| z.re).sum::<f64>() - trace).abs() < 1e-12);
        assert!((eig[0].re - 0.6029171525133332).abs() < 1e-10 && eig[0].im == 0.0);
        assert!((eig[1].re - 2.3433228756329036).abs() < 1e-10);
        assert!((eig[2].im - 0.13208241943406002).abs() < 1e-10 && (eig[1].im + eig[2].im).abs() < 1e-14);
        let d = super::super::spectral_decomposition(&m, 1e-7).unwrap();
        assert_eq!(d.blocks.iter().map(|b| b.dim).collect::<Vec<_>>(), vec![1, 2]);
    }
}
