//! Scalar check of the backward Euler approximation of `e^{-tλ}`.
//!
//! For `R(λ) = 1/(1+λ)` and `F_n(λ) = R(λ)^n - e^{-nλ}` the smoothing
//! estimate asserts `sup_λ λ^{r/2} |F_n(λ)| <= C n^{-(ρ+r)/2}`. The report
//! evaluates the normalized supremum `n^{(ρ+r)/2} sup_λ λ^{r/2}|F_n(λ)|`
//! on a logarithmic λ grid for a set of step counts.

use crate::error::{Error, Result};
use crate::fit::log_log_slope;

/// `λ - ln(1 + λ)` without cancellation for small `λ`.
fn log_excess(lambda: f64) -> f64 {
    if lambda < 0.05 {
        // alternating series Σ_{k>=2} (-1)^k λ^k / k
        let mut term = lambda * lambda;
        let mut acc = 0.0;
        for k in 2..40 {
            let signed = if k % 2 == 0 { term } else { -term };
            acc += signed / k as f64;
            term *= lambda;
            if term < 1e-18 * acc.abs() {
                break;
            }
        }
        acc
    } else {
        lambda - lambda.ln_1p()
    }
}

/// `(1 + λ)^{-n} - e^{-nλ}`, evaluated as
/// `(1+λ)^{-n} (1 - e^{-n(λ - ln(1+λ))})` to stay accurate when both
/// terms are tiny or nearly equal.
pub fn f_n(lambda: f64, n: u32) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let n = f64::from(n);
    (-n * lambda.ln_1p()).exp() * -(-n * log_excess(lambda)).exp_m1()
}

/// Logarithmic λ grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub per_decade: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            min: 1e-6,
            max: 1e6,
            per_decade: 400,
        }
    }
}

impl LambdaGrid {
    pub fn points(&self) -> Vec<f64> {
        let (lo, hi) = (self.min.log10(), self.max.log10());
        let count = ((hi - lo) * self.per_decade as f64).round() as usize;
        (0..=count)
            .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / count.max(1) as f64))
            .collect()
    }
}

/// Distinct integers `1..=n_max`, roughly `per_decade` per decade, always
/// including `1` and `n_max`.
pub fn log_spaced_steps(n_max: u32, per_decade: usize) -> Vec<u32> {
    let decades = f64::from(n_max.max(1)).log10();
    let count = (decades * per_decade as f64).ceil() as usize;
    let mut steps: Vec<u32> = (0..=count)
        .map(|k| 10f64.powf(decades * k as f64 / count.max(1) as f64).round() as u32)
        .chain([1, n_max.max(1)])
        .collect();
    steps.sort_unstable();
    steps.dedup();
    steps
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalBoundReport {
    pub r: f64,
    pub rho: f64,
    pub n_values: Vec<u32>,
    pub sup_values: Vec<f64>,
    pub observed_constant: f64,
}

impl RationalBoundReport {
    /// Least-squares slope of `ln sup` against `ln n`.
    pub fn trend_slope(&self) -> Option<f64> {
        let ns: Vec<f64> = self.n_values.iter().map(|&n| f64::from(n)).collect();
        log_log_slope(&ns, &self.sup_values)
    }

    /// Largest normalized supremum over `n <= n_max`.
    pub fn max_up_to(&self, n_max: u32) -> f64 {
        self.n_values
            .iter()
            .zip(&self.sup_values)
            .filter(|(n, _)| **n <= n_max)
            .fold(0.0, |m, (_, s)| m.max(*s))
    }
}

fn normalized(lambda: f64, n: u32, r: f64, rho: f64) -> f64 {
    lambda.powf(0.5 * r) * f_n(lambda, n).abs() * f64::from(n).powf(0.5 * (rho + r))
}

/// Normalized supremum for one step count: grid maximum, then a
/// golden-section refinement in `ln λ` around the best grid point.
fn normalized_sup(n: u32, r: f64, rho: f64, grid: &[f64]) -> f64 {
    let value = |l: f64| normalized(l, n, r, rho);
    // the maximizer drifts like 1/n; seed candidates there too
    let candidates = (1..=32).map(|c| 0.25 * c as f64 / f64::from(n));
    let (mut best_lambda, mut best) = (grid[0], value(grid[0]));
    for l in grid.iter().copied().chain(candidates) {
        let v = value(l);
        if v > best {
            best = v;
            best_lambda = l;
        }
    }
    let ratio = grid.get(1).map_or(1.01, |g1| g1 / grid[0]).max(1.0 + 1e-6);
    let (mut a, mut b) = ((best_lambda / ratio).ln(), (best_lambda * ratio).ln());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (value(c.exp()), value(d.exp()));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = value(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = value(d.exp());
        }
    }
    best.max(fc).max(fd)
}

pub fn verify_bound(r: f64, rho: f64, n_values: &[u32], grid: &LambdaGrid) -> Result<RationalBoundReport> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("r = {r} not in [0, 1]")));
    }
    if !(0.0..=2.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho = {rho} not in [0, 2]")));
    }
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::InvalidArgument("step counts must be positive and nonempty".into()));
    }
    if !(grid.min > 0.0 && grid.max > grid.min && grid.per_decade > 0) {
        return Err(Error::InvalidArgument(format!("invalid lambda grid {grid:?}")));
    }
    let points = grid.points();
    let sup_values: Vec<f64> = n_values.iter().map(|&n| normalized_sup(n, r, rho, &points)).collect();
    let observed_constant = sup_values.iter().cloned().fold(0.0, f64::max);
    Ok(RationalBoundReport {
        r,
        rho,
        n_values: n_values.to_vec(),
        sup_values,
        observed_constant,
    })
}
