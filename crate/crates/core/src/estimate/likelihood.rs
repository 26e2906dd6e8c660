//! Maximum-likelihood post-processing of schedule hit counts.
//!
//! Both estimators search θ ∈ [0, π/2] on a dense grid, refine the best grid
//! point by golden-section search, and report a likelihood-ratio interval
//! (log-likelihood drop of 1/2, roughly 68%).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::problem::HitRecord;
use crate::error::{Error, Result};

/// Minimum number of θ grid points for the plain estimator.
pub const MLE_GRID_POINTS: usize = 100_001;

/// Log-likelihood drop that bounds the reported interval.
pub const LR_DROP: f64 = 0.5;

/// Conditions worth surfacing next to an estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitFlags {
    /// The interval reaches 0 or 1.
    pub at_boundary: bool,
    /// The likelihood varies by less than the LR drop over all θ.
    pub flat_likelihood: bool,
    /// The noise rate cannot be bounded by the data.
    pub lambda_unidentified: bool,
}

/// Point estimate of a = sin²θ with its interval and cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEstimate {
    pub a_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// P-invocations consumed.
    pub oracle_calls: u64,
    /// Fitted damping rate per (2m + 1), noise-aware fits only.
    pub lambda_hat: Option<f64>,
    pub flags: FitFlags,
}

impl AmplitudeEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    /// An estimate with no uncertainty (exact-probability mode).
    pub fn exact(a: f64) -> Self {
        AmplitudeEstimate {
            a_hat: a,
            ci_low: a,
            ci_high: a,
            oracle_calls: 0,
            lambda_hat: None,
            flags: FitFlags::default(),
        }
    }
}

fn validate(records: &[HitRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Domain("no schedule results to fit".into()));
    }
    if let Some(r) = records.iter().find(|r| r.hits > r.shots || r.shots == 0) {
        return Err(Error::Domain(format!("invalid record {r:?}")));
    }
    Ok(())
}

#[inline]
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Log-likelihood of the damped model
/// P(1|m) = 1/2 + (sin²((2m+1)θ) − 1/2)·e^{−λ(2m+1)}; λ = 0 is the plain model.
pub fn log_likelihood(records: &[HitRecord], theta: f64, lambda: f64) -> f64 {
    records
        .iter()
        .map(|r| {
            let k = f64::from(2 * r.iterations + 1);
            let (s, c) = (k * theta).sin_cos();
            let (s2, c2) = (s * s, c * c);
            let (p1, p0) = if lambda == 0.0 {
                (s2, c2)
            } else {
                let d = (-lambda * k).exp();
                (0.5 + (s2 - 0.5) * d, 0.5 + (c2 - 0.5) * d)
            };
            xlogy(r.hits as f64, p1) + xlogy((r.shots - r.hits) as f64, p0)
        })
        .sum()
}

fn theta_grid(points: usize) -> impl Iterator<Item = f64> {
    let step = FRAC_PI_2 / (points - 1) as f64;
    (0..points).map(move |i| {
        if i + 1 == points {
            FRAC_PI_2
        } else {
            i as f64 * step
        }
    })
}

/// Golden-section maximization of `f` on [lo, hi], also comparing the endpoints.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(lo, f(lo)), (hi, f(hi)), (mid, f(mid))].into_iter().fold(
        (mid, f64::NEG_INFINITY),
        |best, cand| if cand.1 > best.1 { cand } else { best },
    )
}

/// Bisects for the point in [inside, outside] where `f` falls to `level`.
fn crossing(f: impl Fn(f64) -> f64, mut inside: f64, mut outside: f64, level: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (inside + outside);
        if f(mid) >= level {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Likelihood-ratio interval in θ around a maximum found at grid index `best`.
fn lr_interval(
    grid: &[f64],
    values: &[f64],
    best: usize,
    level: f64,
    eval: impl Fn(f64) -> f64,
    theta_star: f64,
) -> (f64, f64, bool) {
    let mut lo_idx = best;
    while lo_idx > 0 && values[lo_idx - 1] >= level {
        lo_idx -= 1;
    }
    let mut hi_idx = best;
    while hi_idx + 1 < grid.len() && values[hi_idx + 1] >= level {
        hi_idx += 1;
    }
    let theta_lo = if lo_idx == 0 {
        0.0
    } else {
        crossing(&eval, grid[lo_idx].min(theta_star), grid[lo_idx - 1], level)
    };
    let theta_hi = if hi_idx + 1 == grid.len() {
        FRAC_PI_2
    } else {
        crossing(&eval, grid[hi_idx].max(theta_star), grid[hi_idx + 1], level)
    };
    let boundary = lo_idx == 0 || hi_idx + 1 == grid.len();
    (theta_lo, theta_hi, boundary)
}

/// Newton steps on the analytic score of the undamped likelihood. Golden
/// search stalls near √ε in θ because the peak is flat to that order.
fn polish_theta(records: &[HitRecord], theta: f64) -> f64 {
    let mut t = theta;
    for _ in 0..8 {
        if t <= 0.0 || t >= FRAC_PI_2 {
            break;
        }
        let (mut d1, mut d2) = (0.0, 0.0);
        for r in records {
            let k = f64::from(2 * r.iterations + 1);
            let (s, c) = (k * t).sin_cos();
            let (h, miss) = (r.hits as f64, (r.shots - r.hits) as f64);
            d1 += 2.0 * k * (h * c / s - miss * s / c);
            d2 -= 2.0 * k * k * (h / (s * s) + miss / (c * c));
        }
        if !(d1.is_finite() && d2.is_finite()) || d2 >= 0.0 {
            break;
        }
        let next = t - d1 / d2;
        if !(next > 0.0 && next < FRAC_PI_2)
            || log_likelihood(records, next, 0.0) < log_likelihood(records, t, 0.0) - 1e-9
        {
            break;
        }
        let done = (next - t).abs() < 1e-15;
        t = next;
        if done {
            break;
        }
    }
    t
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

fn to_estimate(
    theta: f64,
    theta_lo: f64,
    theta_hi: f64,
    records: &[HitRecord],
) -> AmplitudeEstimate {
    let a_hat = theta.sin().powi(2).clamp(0.0, 1.0);
    let lo = theta_lo.sin().powi(2).clamp(0.0, 1.0);
    let hi = theta_hi.sin().powi(2).clamp(0.0, 1.0);
    AmplitudeEstimate {
        a_hat,
        ci_low: lo.min(a_hat),
        ci_high: hi.max(a_hat),
        oracle_calls: records.iter().map(HitRecord::calls).sum(),
        lambda_hat: None,
        flags: FitFlags::default(),
    }
}

/// Maximizes Π_k sin²((2m_k+1)θ)^{h_k}·cos²((2m_k+1)θ)^{N_k−h_k} over θ.
pub fn mle_estimate(records: &[HitRecord]) -> Result<AmplitudeEstimate> {
    validate(records)?;
    let grid: Vec<f64> = theta_grid(MLE_GRID_POINTS).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&t| log_likelihood(records, t, 0.0))
        .collect();
    let best = argmax(&values);
    let ll = |t: f64| log_likelihood(records, t, 0.0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (theta, _) = golden_max(ll, lo, hi);
    let theta = polish_theta(records, theta);
    let ll_max = ll(theta).max(values[best]);
    let level = ll_max - LR_DROP;
    let (t_lo, t_hi, boundary) = lr_interval(&grid, &values, best, level, ll, theta);
    let mut est = to_estimate(theta, t_lo, t_hi, records);
    est.flags.at_boundary = boundary;
    est.flags.flat_likelihood = values.iter().all(|&v| v >= level);
    Ok(est)
}

/// Grid settings for [`noise_aware_mle_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseAwareOptions {
    /// Upper end of the λ search range.
    pub lambda_max: f64,
    /// Number of positive λ grid values (log-spaced), in addition to λ = 0.
    pub lambda_points: usize,
    /// Pins λ instead of fitting it.
    pub fixed_lambda: Option<f64>,
}

impl Default for NoiseAwareOptions {
    fn default() -> Self {
        NoiseAwareOptions {
            lambda_max: 2.0,
            lambda_points: 48,
            fixed_lambda: None,
        }
    }
}

impl NoiseAwareOptions {
    fn lambda_grid(&self) -> Vec<f64> {
        if let Some(l) = self.fixed_lambda {
            return vec![l];
        }
        let lo: f64 = 1e-4;
        let n = self.lambda_points.max(2);
        let ratio = (self.lambda_max / lo).powf(1.0 / (n - 1) as f64);
        std::iter::once(0.0)
            .chain((0..n).map(|i| lo * ratio.powi(i as i32)))
            .collect()
    }
}

/// θ grid resolution for the joint fit: enough points per likelihood fringe.
fn damped_theta_points(records: &[HitRecord]) -> usize {
    let k_max = records
        .iter()
        .map(|r| 2 * r.iterations as usize + 1)
        .max()
        .unwrap_or(1);
    (64 * k_max + 1).clamp(4097, MLE_GRID_POINTS)
}

/// Joint fit of (θ, λ) under exponential damping toward 1/2.
pub fn noise_aware_mle(records: &[HitRecord]) -> Result<AmplitudeEstimate> {
    noise_aware_mle_with(records, &NoiseAwareOptions::default())
}

pub fn noise_aware_mle_with(
    records: &[HitRecord],
    opts: &NoiseAwareOptions,
) -> Result<AmplitudeEstimate> {
    validate(records)?;
    if let Some(l) = opts.fixed_lambda {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!(
                "fixed lambda {l} must be finite and >= 0"
            )));
        }
    }
    let lambdas = opts.lambda_grid();
    let grid: Vec<f64> = theta_grid(damped_theta_points(records)).collect();

    // table[j][i] = ll(theta_i, lambda_j)
    let table: Vec<Vec<f64>> = lambdas
        .iter()
        .map(|&l| {
            grid.iter()
                .map(|&t| log_likelihood(records, t, l))
                .collect()
        })
        .collect();
    let profile_theta: Vec<f64> = (0..grid.len())
        .map(|i| {
            table
                .iter()
                .map(|row| row[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let profile_lambda: Vec<f64> = table
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let best_i = argmax(&profile_theta);
    let best_j = argmax(&profile_lambda);

    // alternate 1-D refinements within one grid cell of the best point
    let (mut theta, mut lambda) = (grid[best_i], lambdas[best_j]);
    let t_lo = grid[best_i.saturating_sub(1)];
    let t_hi = grid[(best_i + 1).min(grid.len() - 1)];
    let l_lo = lambdas[best_j.saturating_sub(1)];
    let l_hi = lambdas[(best_j + 1).min(lambdas.len() - 1)];
    let mut ll_best = table[best_j][best_i];
    for _ in 0..8 {
        let (t, v) = golden_max(|t| log_likelihood(records, t, lambda), t_lo, t_hi);
        if v >= ll_best {
            theta = t;
            ll_best = v;
        }
        if l_hi > l_lo {
            let (l, v) = golden_max(|l| log_likelihood(records, theta, l), l_lo, l_hi);
            if v >= ll_best {
                lambda = l;
                ll_best = v;
            }
        }
    }

    let level = ll_best - LR_DROP;
    let profile = |t: f64| {
        let on_grid = lambdas
            .iter()
            .map(|&l| log_likelihood(records, t, l))
            .fold(f64::NEG_INFINITY, f64::max);
        on_grid.max(log_likelihood(records, t, lambda))
    };
    let (ci_t_lo, ci_t_hi, boundary) =
        lr_interval(&grid, &profile_theta, best_i, level, profile, theta);
    let mut est = to_estimate(theta, ci_t_lo, ci_t_hi, records);
    est.lambda_hat = Some(lambda);
    est.flags.at_boundary = boundary;
    est.flags.flat_likelihood = profile_theta.iter().all(|&v| v >= level);
    est.flags.lambda_unidentified = lambdas.len() > 1 && profile_lambda.iter().all(|&v| v >= level);
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iterations: u32, shots: u64, hits: u64) -> HitRecord {
        HitRecord {
            iterations,
            shots,
            hits,
        }
    }

    #[test]
    fn binomial_mle() {
        let e = mle_estimate(&[rec(0, 1000, 500)]).unwrap();
        assert!((e.a_hat - 0.5).abs() < 1e-9, "{}", e.a_hat);
        assert!(e.ci_low < 0.5 && e.ci_high > 0.5);
        // LR interval of a binomial proportion at N = 1000 is about ±sqrt(p(1-p)/N)
        assert!((e.half_width() - (0.25f64 / 1000.0).sqrt()).abs() < 2e-3);
        assert_eq!(e.oracle_calls, 1000);

        let e = mle_estimate(&[rec(0, 400, 100)]).unwrap();
        assert!((e.a_hat - 0.25).abs() < 1e-9);
    }

    #[test]
    fn all_hits_and_no_hits() {
        let all = [rec(0, 50, 50), rec(1, 50, 50), rec(2, 50, 50)];
        let e = mle_estimate(&all).unwrap();
        assert_eq!(e.a_hat, 1.0);
        assert!(e.ci_low < 1.0);
        assert_eq!(e.ci_high, 1.0);
        assert!(e.flags.at_boundary);

        let none = [rec(0, 50, 0), rec(1, 50, 0)];
        let e = mle_estimate(&none).unwrap();
        assert_eq!(e.a_hat, 0.0);
        assert!(e.ci_high > 0.0);
        assert!(e.flags.at_boundary);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(mle_estimate(&[]).is_err());
        assert!(mle_estimate(&[rec(0, 10, 11)]).is_err());
        assert!(noise_aware_mle(&[]).is_err());
        let opts = NoiseAwareOptions {
            fixed_lambda: Some(-1.0),
            ..Default::default()
        };
        assert!(noise_aware_mle_with(&[rec(0, 10, 5)], &opts).is_err());
    }

    #[test]
    fn balanced_data_leaves_lambda_unidentified() {
        let recs: Vec<HitRecord> = [0, 1, 2, 4, 8].iter().map(|&m| rec(m, 100, 50)).collect();
        let e = noise_aware_mle(&recs).unwrap();
        assert!((e.a_hat - 0.5).abs() < 0.05, "{}", e.a_hat);
        assert!(e.flags.lambda_unidentified);
    }

    #[test]
    fn lambda_grid_shape() {
        let g = NoiseAwareOptions::default().lambda_grid();
        assert_eq!(g.len(), 49);
        assert_eq!(g[0], 0.0);
        assert!((g[48] - 2.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
