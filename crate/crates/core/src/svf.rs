//! The singular value function and the affinity exponent `s(W, x)`.
//!
//! For a contracting `W` with singular values `α_1 ≥ … ≥ α_n`,
//! `φ_W(s) = α_1⋯α_{m−1}·α_m^{s−m+1}` for `m − 1 < s ≤ m`. The exponent
//! `s(W, x)` is the root of `lim_k (1/k)·ln φ_{W^k}(s) = ln x`, or `n` if
//! no root exists. For `W = c^{E⊕D}`, `x = c^q` the limit only depends on
//! the eigenvalue real parts, which yields the closed forms
//! [`s_closed_graph`] and [`s_closed_range`].

use crate::error::{Error, Result};
use crate::matrix::power::{ensure_nonsingular, log_norms_doubling};
use crate::matrix::{spectral_radius, SpectrumSummary, SquareMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    Interior,
    /// No root below `n`; the exponent is reported as `n`.
    Saturated,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::Interior => "interior",
            CaseTag::Saturated => "saturated",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Numeric,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Numeric => "numeric",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SValResult {
    pub s: f64,
    /// 1-based index of the branch that produced `s`: the position `r` in the
    /// merged spectrum for graphs, the distinct-real-part index for ranges,
    /// `ceil(s)` for the numeric path.
    pub branch_index: usize,
    pub case_tag: CaseTag,
    pub method: Method,
    pub k_used: Option<u64>,
    pub residual: Option<f64>,
}

impl SValResult {
    fn closed(s: f64, branch_index: usize, case_tag: CaseTag) -> Self {
        SValResult { s, branch_index, case_tag, method: Method::ClosedForm, k_used: None, residual: None }
    }
}

fn singular_values_desc(w: &SquareMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = w.as_dmatrix().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn check_s(s: f64, n: usize) -> Result<()> {
    if !(s > 0.0 && s <= n as f64) {
        return Err(Error::domain(format!("s = {s} outside (0, {n}]")));
    }
    Ok(())
}

/// `ln φ_W(s)`.
pub fn log_phi(w: &SquareMatrix, s: f64) -> Result<f64> {
    let n = w.order();
    check_s(s, n)?;
    let sv = singular_values_desc(w);
    if sv[0] >= 1.0 {
        return Err(Error::domain(format!("W is not contracting (largest singular value {})", sv[0])));
    }
    if sv[n - 1] <= 0.0 {
        return Err(Error::domain("W is singular"));
    }
    let m = (s.ceil() as usize).clamp(1, n);
    let head: f64 = sv[..m - 1].iter().map(|a| a.ln()).sum();
    Ok(head + (s - (m - 1) as f64) * sv[m - 1].ln())
}

/// The singular value function `φ_W(s)`.
pub fn phi(w: &SquareMatrix, s: f64) -> Result<f64> {
    log_phi(w, s).map(f64::exp)
}

/// Powers `k` visited by the numeric limit, all powers of two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KSchedule {
    pub k_min: u64,
    pub k_max: u64,
    /// Convergence tolerance on successive rate estimates, relative to
    /// `1 + |rate|`.
    pub tol: f64,
}

impl Default for KSchedule {
    fn default() -> Self {
        KSchedule { k_min: 64, k_max: 1 << 40, tol: 1e-10 }
    }
}

impl KSchedule {
    fn validate(&self) -> Result<(u32, u32)> {
        if !self.k_min.is_power_of_two() || !self.k_max.is_power_of_two() {
            return Err(Error::input("k schedule bounds must be powers of two"));
        }
        if self.k_min < 4 || self.k_max < self.k_min {
            return Err(Error::input("k schedule needs 4 ≤ k_min ≤ k_max"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::input("k schedule tolerance must be positive"));
        }
        Ok((self.k_min.trailing_zeros(), self.k_max.trailing_zeros()))
    }
}

/// Limits `R_j = lim (1/k)·ln(α_1⋯α_j)(W^k)` for `j = 1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRates {
    pub rates: Vec<f64>,
    pub k_used: u64,
}

impl GrowthRates {
    /// Piecewise-linear interpolation with `rate(0) = 0`.
    pub fn at(&self, r: f64) -> f64 {
        let n = self.rates.len();
        let m = (r.ceil() as usize).clamp(1, n);
        let prev = if m == 1 { 0.0 } else { self.rates[m - 2] };
        prev + (r - (m - 1) as f64) * (self.rates[m - 1] - prev)
    }
}

// ln‖A^k‖ = R·k + a·ln k + b + o(1) for a fixed matrix A, so along k = 2^i the
// second difference of g_i = ln‖A^{2^i}‖ is R·2^i plus a vanishing remainder.
fn rate_for_compound(w: &SquareMatrix, j: usize, sched: &KSchedule) -> Result<(f64, u64)> {
    let (lo, hi) = sched.validate()?;
    let g = log_norms_doubling(w, j, hi)?;
    let estimate = |i: usize| (g[i] - 2.0 * g[i - 1] + g[i - 2]) / (1u64 << (i - 2)) as f64;
    let first = lo as usize;
    let mut last = estimate(first);
    let mut settled = 0;
    for i in first + 1..=hi as usize {
        let cur = estimate(i);
        if (cur - last).abs() <= sched.tol * (1.0 + cur.abs()) {
            settled += 1;
            if settled == 2 {
                return Ok((cur, 1u64 << i));
            }
        } else {
            settled = 0;
        }
        last = cur;
    }
    let prev = estimate(hi as usize - 1);
    Err(Error::numeric(format!(
        "growth rate of order {j} did not converge by k = {}: last estimates {prev:.12e}, {last:.12e}",
        sched.k_max
    )))
}

fn check_contracting(w: &SquareMatrix) -> Result<()> {
    let rho = spectral_radius(w)?;
    if rho >= 1.0 {
        return Err(Error::domain(format!("W is not contracting (spectral radius {rho})")));
    }
    ensure_nonsingular(w)
}

/// All cumulative growth rates of `W`.
pub fn growth_rates(w: &SquareMatrix, sched: &KSchedule) -> Result<GrowthRates> {
    check_contracting(w)?;
    let mut rates = Vec::with_capacity(w.order());
    let mut k_used = 0;
    for j in 1..=w.order() {
        let (r, k) = rate_for_compound(w, j, sched)?;
        rates.push(r);
        k_used = k_used.max(k);
    }
    Ok(GrowthRates { rates, k_used })
}

/// `lim_k (1/k)·ln φ_{W^k}(r)`.
pub fn growth_rate(w: &SquareMatrix, r: f64, sched: &KSchedule) -> Result<f64> {
    check_s(r, w.order())?;
    Ok(growth_rates(w, sched)?.at(r))
}

/// Numeric `s(W, x)` with the default schedule.
pub fn s_numeric(w: &SquareMatrix, x: f64, tol: f64) -> Result<SValResult> {
    s_numeric_with(w, x, tol, &KSchedule::default())
}

/// Numeric `s(W, x)`. The rate is linear between integers, so the root is
/// located on the first integer piece where the rate falls to `ln x` and
/// solved there directly; `tol` bounds the accepted residual.
pub fn s_numeric_with(w: &SquareMatrix, x: f64, tol: f64, sched: &KSchedule) -> Result<SValResult> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("x = {x} outside (0, 1)")));
    }
    if !(tol > 0.0) {
        return Err(Error::input("tolerance must be positive"));
    }
    let g = growth_rates(w, sched)?;
    let n = w.order();
    let target = x.ln();
    let eps = 1e-12 * (1.0 + target.abs());
    let numeric = |s: f64, branch_index: usize, case_tag: CaseTag| SValResult {
        s,
        branch_index,
        case_tag,
        method: Method::Numeric,
        k_used: Some(g.k_used),
        residual: Some(g.at(s) - target),
    };
    if g.rates[n - 1] >= target - eps {
        return Ok(numeric(n as f64, n, CaseTag::Saturated));
    }
    let m = g.rates.iter().position(|&r| r < target - eps).expect("last rate is below target") + 1;
    let prev = if m == 1 { 0.0 } else { g.rates[m - 2] };
    let slope = g.rates[m - 1] - prev;
    let s = ((m - 1) as f64 + (target - prev) / slope).clamp((m - 1) as f64, m as f64);
    let out = numeric(s, m, CaseTag::Interior);
    if out.residual.unwrap().abs() > tol {
        return Err(Error::numeric(format!("root residual {:e} exceeds {tol:e}", out.residual.unwrap())));
    }
    Ok(out)
}

/// Affine interpolation root over an ascending list: the `r` with
/// `S_{r−1} < q ≤ S_r` and `s = r − 1 + (q − S_{r−1})/v_r`.
fn interpolated_root(values: &[f64], q: f64) -> Option<(f64, usize)> {
    let mut partial = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let next = partial + v;
        if q <= next {
            let s = if q == next { (i + 1) as f64 } else { i as f64 + (q - partial) / v };
            return Some((s, i + 1));
        }
        partial = next;
    }
    None
}

fn check_summary(spec: &SpectrumSummary) -> Result<()> {
    let ok = |parts: &[(f64, usize)]| {
        !parts.is_empty()
            && parts.iter().all(|&(v, k)| v > 0.0 && v.is_finite() && k > 0)
            && parts.windows(2).all(|w| w[0].0 < w[1].0)
    };
    if !ok(&spec.a) || !ok(&spec.lambda) || !(spec.q > 0.0) {
        return Err(Error::domain("malformed spectrum summary"));
    }
    Ok(())
}

/// `s(c^{E⊕D}, c^q)` from the merged spectrum.
pub fn s_closed_graph(spec: &SpectrumSummary) -> Result<SValResult> {
    check_summary(spec)?;
    let (s, r) = interpolated_root(&spec.gamma, spec.q)
        .ok_or_else(|| Error::domain("q exceeds the sum of the merged spectrum"))?;
    Ok(SValResult::closed(s, r, CaseTag::Interior))
}

/// `s(c^D, c^q)` from the spectrum of `D`.
pub fn s_closed_range(spec: &SpectrumSummary) -> Result<SValResult> {
    check_summary(spec)?;
    let m = spec.space_dim();
    let q = spec.q;
    let mut partial = 0.0;
    for (l, &(lam, mult)) in spec.lambda.iter().enumerate() {
        let next = partial + lam * mult as f64;
        if q <= next {
            let shift: f64 = spec.lambda[..=l].iter().map(|&(li, mi)| (lam - li) * mi as f64).sum();
            let s = (q + shift) / lam;
            return Ok(SValResult::closed(s.min(m as f64), l + 1, CaseTag::Interior));
        }
        partial = next;
    }
    Ok(SValResult::closed(m as f64, spec.lambda.len(), CaseTag::Saturated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{matrix_power_scale, spectrum_summary, ExponentPair};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn phi_on_diagonal() {
        let w = SquareMatrix::diagonal(&[0.5, 0.25]).unwrap();
        close(phi(&w, 2.0).unwrap(), 0.125, 1e-15);
        close(phi(&w, 1.0).unwrap(), 0.5, 1e-15);
        close(phi(&w, 1.5).unwrap(), 0.25, 1e-15);
        assert!(phi(&w, 0.0).is_err());
        assert!(phi(&w, 2.5).is_err());
        assert!(phi(&SquareMatrix::diagonal(&[1.5, 0.2]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn growth_rate_examples() {
        let sched = KSchedule::default();
        let w = SquareMatrix::diagonal(&[0.5, 0.5f64.sqrt()]).unwrap();
        // Largest singular value 0.5^0.5 in full, then half of ln 0.5.
        close(growth_rate(&w, 1.5, &sched).unwrap(), 0.5f64.ln(), 1e-12);
        let w = SquareMatrix::diagonal(&[0.6, 0.6]).unwrap();
        close(growth_rate(&w, 2.0, &sched).unwrap(), 2.0 * 0.6f64.ln(), 1e-12);
    }

    #[test]
    fn s_numeric_examples() {
        let w = SquareMatrix::diagonal(&[0.5, 0.5f64.sqrt()]).unwrap();
        let r = s_numeric(&w, 0.5, 1e-6).unwrap();
        close(r.s, 1.5, 1e-9);
        assert_eq!(r.case_tag, CaseTag::Interior);

        let w = SquareMatrix::diagonal(&[0.6, 0.6]).unwrap();
        let r = s_numeric(&w, 0.36, 1e-6).unwrap();
        assert_eq!(r.s, 2.0);
        assert_eq!(r.case_tag, CaseTag::Saturated);

        assert!(s_numeric(&w, 1.0, 1e-6).is_err());
        assert!(s_numeric(&SquareMatrix::diagonal(&[1.2, 0.5]).unwrap(), 0.5, 1e-6).is_err());
    }

    #[test]
    fn rotation_block_numeric_matches_closed() {
        let e = SquareMatrix::from_rows(&[&[1.0]]).unwrap();
        let d = SquareMatrix::from_rows(&[&[0.6, -0.4], &[0.4, 0.6]]).unwrap();
        let pair = ExponentPair::new(e, d, 0.5).unwrap();
        let w = pair.w().unwrap();
        let r = s_numeric(&w, 0.5, 1e-6).unwrap();
        close(r.s, 5.0 / 3.0, 1e-6);
        let spec = spectrum_summary(&pair, 1e-9).unwrap();
        close(s_closed_graph(&spec).unwrap().s, 5.0 / 3.0, 1e-15);
    }

    #[test]
    fn jordan_block_numeric_matches_closed() {
        let e = SquareMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let d = SquareMatrix::from_rows(&[&[0.7]]).unwrap();
        let pair = ExponentPair::new(e.clone(), d, 0.5).unwrap();
        let spec = spectrum_summary(&pair, 1e-9).unwrap();
        let closed = s_closed_graph(&spec).unwrap().s;
        close(closed, 2.3, 1e-15);
        let w = pair.w().unwrap();
        let num = s_numeric(&w, 0.5f64.powf(pair.q()), 1e-6).unwrap();
        close(num.s, closed, 1e-6);
        let u = matrix_power_scale(&e, 0.5).unwrap();
        assert!(growth_rate(&u, 1.0, &KSchedule::default()).is_ok());
    }

    #[test]
    fn closed_graph_examples() {
        let s = |a: &[f64], l: &[f64]| s_closed_graph(&SpectrumSummary::from_values(a, l).unwrap()).unwrap();
        close(s(&[1.0], &[0.5]).s, 1.5, 1e-15);
        let r = s(&[1.0, 3.0], &[0.5]);
        close(r.s, 17.0 / 6.0, 1e-15);
        assert_eq!(r.branch_index, 3);
        close(s(&[1.0, 1.0], &[0.7]).s, 2.3, 1e-15);
    }

    #[test]
    fn closed_graph_tie_is_exact() {
        // q = 2 = 0.5 + 1.5 exactly.
        let spec = SpectrumSummary::from_values(&[2.0], &[0.5, 1.5]).unwrap();
        let r = s_closed_graph(&spec).unwrap();
        assert_eq!(r.s, 2.0);
        assert_eq!(r.branch_index, 2);
    }

    #[test]
    fn closed_range_examples() {
        let s = |a: &[f64], l: &[f64]| s_closed_range(&SpectrumSummary::from_values(a, l).unwrap()).unwrap();
        let r = s(&[1.0], &[0.5, 0.8]);
        close(r.s, 1.625, 1e-15);
        assert_eq!((r.branch_index, r.case_tag), (2, CaseTag::Interior));
        let r = s(&[1.0, 1.0], &[0.7]);
        assert_eq!((r.s, r.case_tag), (1.0, CaseTag::Saturated));
        let r = s(&[1.0], &[2.0 / 3.0]);
        assert_eq!((r.s, r.case_tag), (1.0, CaseTag::Saturated));
    }

    #[test]
    fn interpolation_of_rates() {
        let g = GrowthRates { rates: vec![-1.0, -3.0], k_used: 0 };
        close(g.at(0.5), -0.5, 0.0);
        close(g.at(1.0), -1.0, 0.0);
        close(g.at(1.5), -2.0, 0.0);
        close(g.at(2.0), -3.0, 0.0);
    }
}
