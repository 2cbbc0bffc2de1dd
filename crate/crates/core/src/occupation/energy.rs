//! Riesz `γ`-energies of occupation measures and their behavior under
//! lattice refinement.
//!
//! The graph energy of a path is the mean of `(‖t_i − t_j‖ + ‖X_i − X_j‖)^{−γ}`
//! over pairs `i ≠ j`; the range energy uses `‖X_i − X_j‖^{−γ}`. Pairs at
//! distance zero (only possible for ranges) have no continuum counterpart and
//! contribute the capped value `h^{−γ}`, `h` the lattice spacing.
//!
//! The energy stays bounded under refinement for `γ` below the dimension and
//! grows like `h^{−(γ−s)}` above it. Successive increments therefore shrink by
//! `2^{γ−s}` per halving of `h`; [`energy_blowup_scan`] flags `γ` once that
//! ratio is at least [`BLOWUP_RATIO`].

use rand::Rng;
use rayon::prelude::*;

use super::{Kind, PointSet};
use crate::error::{Error, Result};
use crate::fields::{replica_rng, FieldPath};

/// Increment ratio at and above which a `γ` is reported as divergent.
pub const BLOWUP_RATIO: f64 = 0.985;

const CHUNK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyEstimate {
    pub gamma: f64,
    pub value: f64,
    pub pairs: u64,
    /// Pairs at distance zero, given the capped value.
    pub duplicates: u64,
    pub exhaustive: bool,
}

fn distance(points: &PointSet, kind: Kind, i: usize, j: usize) -> f64 {
    let norm = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let dx = norm(points.x(i), points.x(j));
    match kind {
        Kind::Graph => norm(points.t(i), points.t(j)) + dx,
        Kind::Range => dx,
    }
}

#[derive(Clone)]
struct Acc {
    sums: Vec<f64>,
    pairs: u64,
    duplicates: u64,
}

impl Acc {
    fn new(k: usize) -> Self {
        Acc { sums: vec![0.0; k], pairs: 0, duplicates: 0 }
    }

    fn add(&mut self, dist: f64, gammas: &[f64], cap_log: f64) {
        self.pairs += 1;
        let l = if dist == 0.0 {
            self.duplicates += 1;
            cap_log
        } else {
            -dist.ln()
        };
        for (s, &g) in self.sums.iter_mut().zip(gammas) {
            *s += if g == 0.0 { 1.0 } else { (g * l).exp() };
        }
    }

    fn merge(mut self, other: &Acc) -> Acc {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        self.pairs += other.pairs;
        self.duplicates += other.duplicates;
        self
    }
}

/// Energies for several `γ` at once from the same pairs: all pairs if
/// `n(n−1)/2 ≤ pair_budget`, otherwise `pair_budget` random pairs.
pub fn energies(
    points: &PointSet,
    kind: Kind,
    gammas: &[f64],
    pair_budget: u64,
    seed: u64,
) -> Result<Vec<EnergyEstimate>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::domain("energy needs at least two points"));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(Error::domain(format!("gamma = {g} must be finite and nonnegative")));
    }
    if pair_budget == 0 {
        return Err(Error::input("pair budget must be positive"));
    }
    let cap_log = -points.spacing.ln();
    let all_pairs = n as u64 * (n as u64 - 1) / 2;
    let exhaustive = all_pairs <= pair_budget;
    let parts: Vec<Acc> = if exhaustive {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = Acc::new(gammas.len());
                for j in i + 1..n {
                    acc.add(distance(points, kind, i, j), gammas, cap_log);
                }
                acc
            })
            .collect()
    } else {
        let chunks = pair_budget.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = replica_rng(seed, c);
                let mut acc = Acc::new(gammas.len());
                let len = CHUNK.min(pair_budget - c * CHUNK);
                for _ in 0..len {
                    let i = rng.random_range(0..n);
                    let mut j = rng.random_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    acc.add(distance(points, kind, i, j), gammas, cap_log);
                }
                acc
            })
            .collect()
    };
    let total = parts.iter().fold(Acc::new(gammas.len()), |a, b| a.merge(b));
    Ok(gammas
        .iter()
        .zip(&total.sums)
        .map(|(&gamma, &s)| EnergyEstimate {
            gamma,
            value: s / total.pairs as f64,
            pairs: total.pairs,
            duplicates: total.duplicates,
            exhaustive,
        })
        .collect())
}

/// Monte Carlo `γ`-energy of the occupation measure of `path`.
pub fn energy_integral(
    path: &FieldPath,
    kind: Kind,
    gamma: f64,
    pair_budget: u64,
    seed: u64,
) -> Result<EnergyEstimate> {
    let mut out = energies(&PointSet::from_path(path), kind, &[gamma], pair_budget, seed)?;
    Ok(out.remove(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupRow {
    pub gamma: f64,
    /// Mean energy over paths at each refinement, coarsest first.
    pub estimates: Vec<f64>,
    /// Last increment divided by the one before.
    pub ratio: f64,
    pub divergent: bool,
}

/// Energies on the lattices thinned by `2^{R−1}, …, 2, 1` (`R = refinements`),
/// averaged over `paths`, with a divergence flag per `γ`.
pub fn energy_blowup_scan(
    paths: &[FieldPath],
    kind: Kind,
    gammas: &[f64],
    refinements: usize,
    pair_budget: u64,
    seed: u64,
) -> Result<Vec<BlowupRow>> {
    if paths.is_empty() {
        return Err(Error::input("no paths given"));
    }
    if refinements < 3 {
        return Err(Error::input("at least 3 refinement levels are needed to compare increments"));
    }
    let n = paths[0].n;
    if paths.iter().any(|p| p.n != n || p.d != paths[0].d || p.m != paths[0].m) {
        return Err(Error::input("paths must share one lattice"));
    }
    let coarsest = 1usize << (refinements - 1);
    if n / coarsest < 4 {
        return Err(Error::input(format!("n = {n} too small for {refinements} refinement levels")));
    }
    let mut table = vec![vec![0.0; refinements]; gammas.len()];
    for (p_idx, path) in paths.iter().enumerate() {
        for r in 0..refinements {
            let pts = PointSet::strided(path, coarsest >> r)?;
            let est = energies(&pts, kind, gammas, pair_budget, seed.wrapping_add((p_idx * refinements + r) as u64))?;
            for (row, e) in table.iter_mut().zip(&est) {
                row[r] += e.value / paths.len() as f64;
            }
        }
    }
    Ok(gammas
        .iter()
        .zip(table)
        .map(|(&gamma, estimates)| {
            let k = estimates.len();
            let last = estimates[k - 1] - estimates[k - 2];
            let prev = estimates[k - 2] - estimates[k - 3];
            let ratio = if last == 0.0 && prev == 0.0 {
                0.0
            } else if prev <= 0.0 {
                if last > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                last / prev
            };
            BlowupRow { gamma, estimates, ratio, divergent: ratio >= BLOWUP_RATIO }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(n: usize) -> FieldPath {
        FieldPath::from_fn(1, 1, n, "zero", |_| vec![0.0]).unwrap()
    }

    #[test]
    fn two_points_unit_distance() {
        let e = energy_integral(&zero(2), Kind::Graph, 0.7, 10, 0).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(e.exhaustive);
    }

    #[test]
    fn gamma_zero_is_one() {
        let p = crate::fields::simulate_fbm(0.5, 256, 1, 3).unwrap().remove(0);
        for kind in [Kind::Graph, Kind::Range] {
            assert_eq!(energy_integral(&p, kind, 0.0, 1000, 1).unwrap().value, 1.0);
            assert_eq!(energy_integral(&p, kind, 0.0, 1 << 20, 1).unwrap().value, 1.0);
        }
    }

    #[test]
    fn zero_path_approaches_double_integral() {
        // ∫∫|t − s|^{−1/2} ds dt = 8/3; the lattice average misses O(n^{−1/2}).
        let e = energy_integral(&zero(4096), Kind::Graph, 0.5, 1 << 24, 0).unwrap();
        assert!(e.exhaustive);
        assert!((e.value - 8.0 / 3.0).abs() < 0.05, "{}", e.value);
    }

    #[test]
    fn duplicates_are_capped_and_counted() {
        let p = zero(8);
        let e = energy_integral(&p, Kind::Range, 1.0, 100, 0).unwrap();
        assert_eq!(e.duplicates, 28);
        assert!((e.value - 7.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_pairs_are_deterministic() {
        let p = crate::fields::simulate_fbm(0.5, 1024, 1, 3).unwrap().remove(0);
        let a = energy_integral(&p, Kind::Graph, 1.2, 50_000, 9).unwrap();
        let b = energy_integral(&p, Kind::Graph, 1.2, 50_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(!a.exhaustive);
        assert_eq!(a.pairs, 50_000);
    }

    #[test]
    fn zero_path_blows_up_at_one() {
        let rows = energy_blowup_scan(&[zero(4096)], Kind::Graph, &[0.0, 0.5, 0.9, 1.1], 4, 1 << 24, 0).unwrap();
        let flags: Vec<bool> = rows.iter().map(|r| r.divergent).collect();
        assert_eq!(flags, vec![false, false, false, true], "{rows:?}");
    }
}
