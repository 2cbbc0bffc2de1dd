//! Distributional check of `X(ct) = c^D X(t)` by two-sample KS tests.
//!
//! Replicas are split in halves: `X(ct)` is sampled from the first half and
//! `c^D X(t)` from the second, so the two samples are independent. Each probe
//! and coordinate gives one test; the critical value is Bonferroni-corrected
//! so that the whole family has the requested significance.

use super::FieldPath;
use crate::error::{Error, Result};
use crate::matrix::{matrix_power_scale, SquareMatrix};

/// Minimum number of replicas accepted by [`verify_scaling`].
pub const MIN_REPLICAS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub t: Vec<f64>,
    pub coordinate: usize,
    pub ks: f64,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingTestReport {
    pub c: f64,
    pub per_point: Vec<ProbeResult>,
    pub max_ks: f64,
    pub threshold: f64,
    pub significance: f64,
    pub pass: bool,
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut best) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_critical_value(n1: usize, n2: usize, alpha: f64) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n1 + n2) / (n1 * n2)).sqrt()
}

/// Tests `X(ct) = c^D X(t)` in law at each probe `t` (lattice points with `ct`
/// on the lattice too), at family significance `significance`.
pub fn verify_scaling(
    paths: &[FieldPath],
    c: f64,
    exponent: &SquareMatrix,
    probes: &[Vec<f64>],
    significance: f64,
) -> Result<ScalingTestReport> {
    if paths.len() < MIN_REPLICAS {
        return Err(Error::domain(format!("{} replicas; at least {MIN_REPLICAS} are needed", paths.len())));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::input("significance must lie in (0, 1)"));
    }
    if probes.is_empty() {
        return Err(Error::input("no probe points given"));
    }
    let first = &paths[0];
    if paths.iter().any(|p| p.d != first.d || p.m != first.m || p.n != first.n) {
        return Err(Error::input("paths must share one lattice"));
    }
    if exponent.order() != first.m {
        return Err(Error::input(format!("exponent has order {}, paths have m = {}", exponent.order(), first.m)));
    }
    let scale = matrix_power_scale(exponent, c)?;
    let (lo, hi) = paths.split_at(paths.len() / 2);
    let mut per_point = Vec::new();
    for t in probes {
        let i_t = first.index_of(t).ok_or_else(|| Error::domain(format!("probe {t:?} is not a lattice point")))?;
        let ct: Vec<f64> = t.iter().map(|x| c * x).collect();
        let i_ct = first.index_of(&ct).ok_or_else(|| Error::domain(format!("c·t = {ct:?} is off the lattice")))?;
        for k in 0..first.m {
            let a: Vec<f64> = lo.iter().map(|p| p.value(i_ct)[k]).collect();
            let b: Vec<f64> = hi.iter().map(|p| scale.apply(p.value(i_t))[k]).collect();
            per_point.push(ProbeResult {
                t: t.clone(),
                coordinate: k,
                ks: ks_statistic(&a, &b),
                n1: a.len(),
                n2: b.len(),
            });
        }
    }
    let max_ks = per_point.iter().map(|p| p.ks).fold(0.0, f64::max);
    let threshold = ks_critical_value(lo.len(), hi.len(), significance / per_point.len() as f64);
    Ok(ScalingTestReport { c, max_ks, threshold, significance, pass: max_ks < threshold, per_point })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_on_known_samples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        // F_a jumps to 1/2 at 1 while F_b is still 0; at 2 both reach 1/2 and 1/2.
        assert_eq!(ks_statistic(&[1.0, 3.0], &[2.0, 2.5]), 0.5);
        assert_eq!(ks_statistic(&[0.0; 5], &[0.0; 7]), 0.0);
    }

    #[test]
    fn critical_value_matches_table() {
        // c(0.01) = 1.6276 for the asymptotic two-sample test.
        let v = ks_critical_value(100, 100, 0.01);
        assert!((v - 1.6276 * (2.0f64 / 100.0).sqrt()).abs() < 1e-3, "{v}");
    }

    #[test]
    fn checks_lattice_and_sizes() {
        let paths: Vec<FieldPath> =
            (0..MIN_REPLICAS).map(|_| FieldPath::from_fn(1, 1, 9, "zero", |_| vec![0.0]).unwrap()).collect();
        let d = SquareMatrix::from_rows(&[&[0.5]]).unwrap();
        let r = verify_scaling(&paths, 0.5, &d, &[vec![0.0], vec![1.0]], 0.01).unwrap();
        assert_eq!(r.max_ks, 0.0);
        assert!(r.pass);
        assert!(verify_scaling(&paths, 0.5, &d, &[vec![0.125]], 0.01).is_err());
        assert!(verify_scaling(&paths[..10], 0.5, &d, &[vec![1.0]], 0.01).is_err());
    }
}
