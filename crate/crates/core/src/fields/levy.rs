//! Stable Lévy processes with independent symmetric coordinates.
//!
//! Coordinate `i` has exponent `1/α_i`. For `α < 2` the increments over `Δt`
//! are `Δt^{1/α}·S` with `S` standard symmetric stable (characteristic
//! function `exp(−|θ|^α)`), drawn by Chambers–Mallows–Stuck. For `α = 2`
//! increments are `N(0, Δt)`, i.e. standard Brownian motion.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use super::{replica_rng, FieldPath, Model};
use crate::error::{Error, Result};

/// One standard symmetric `α`-stable variate (`N(0,1)` for `α = 2`).
pub fn stable_variate(alpha: f64, rng: &mut impl Rng) -> f64 {
    if alpha == 2.0 {
        return rng.sample(StandardNormal);
    }
    let v = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    a * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Stable Lévy process on `t_i = i/(n−1)`, `m = alphas.len()` coordinates.
pub fn simulate_stable_levy(alphas: &[f64], n: usize, replicas: usize, seed: u64) -> Result<Vec<FieldPath>> {
    if alphas.is_empty() {
        return Err(Error::input("at least one stability index is required"));
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a <= 2.0)) {
        return Err(Error::domain(format!("stability index {a} outside (0, 2]")));
    }
    if n < 2 {
        return Err(Error::input("lattice needs at least 2 points"));
    }
    let m = alphas.len();
    let dt = 1.0 / (n - 1) as f64;
    let scales: Vec<f64> = alphas.iter().map(|&a| dt.powf(1.0 / a)).collect();
    let model = Model::StableLevy { alphas: alphas.to_vec() };
    (0..replicas as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replica_rng(seed, rep);
            let mut values = vec![0.0; n * m];
            for i in 1..n {
                for k in 0..m {
                    let step = scales[k] * stable_variate(alphas[k], &mut rng);
                    values[i * m + k] = values[(i - 1) * m + k] + step;
                }
            }
            FieldPath::new(1, m, n, values, model.clone(), seed, rep)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::replica_rng;

    #[test]
    fn cms_variates_are_finite_and_symmetric() {
        let mut rng = replica_rng(1, 0);
        for &alpha in &[0.5, 1.0, 1.5, 1.8, 2.0] {
            let xs: Vec<f64> = (0..20_000).map(|_| stable_variate(alpha, &mut rng)).collect();
            assert!(xs.iter().all(|x| x.is_finite()));
            let pos = xs.iter().filter(|&&x| x > 0.0).count() as f64 / xs.len() as f64;
            assert!((pos - 0.5).abs() < 0.02, "alpha {alpha}: {pos}");
        }
    }

    #[test]
    fn rejects_bad_index() {
        assert!(matches!(simulate_stable_levy(&[2.5], 8, 1, 0), Err(Error::Domain(_))));
        assert!(matches!(simulate_stable_levy(&[0.0], 8, 1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn starts_at_origin() {
        let p = simulate_stable_levy(&[1.2, 1.9], 16, 2, 4).unwrap();
        assert_eq!(p[1].value(0), &[0.0, 0.0]);
        assert_eq!(p[1].m, 2);
    }
}
