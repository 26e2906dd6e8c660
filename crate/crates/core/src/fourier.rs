//! Cosine-series decomposition of the integrand and per-harmonic estimation
//! with shallow rotation oracles.
//!
//! The normalized integrand f̃ on grid indices 0..N is reflected about both
//! endpoints, giving a continuous function of period 2(N − 1) whose cosine
//! coefficients decay like 1/k² for piecewise-linear f̃. Each harmonic
//! cos(k·ω₀·x) is estimated from P(1) = (1 − E[cos(kω₀x)])/2 of an oracle
//! with n + 1 rotations, in place of the 2ⁿ-gate table oracle.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encode::{synthesize_state_prep, DiscretizedDistribution};
use crate::error::{Error, Result};
use crate::estimate::{
    canonical_qae, mle_estimate, noise_aware_mle, run_schedule, Amplifier, AmplitudeEstimate,
    EstimationProblem, Schedule,
};
use crate::oracle::{build_harmonic_oracle, AffineMap, BoundedFunction, HarmonicSpec};
use crate::rng::{derive_seed, seeded};
use crate::sim::NoiseSpec;

/// Coefficients smaller than this are treated as zero when planning.
pub const NEGLIGIBLE_COEFFICIENT: f64 = 1e-12;

/// Deepest exponential schedule a budget plan will use (m up to 2^(depth−1)).
pub const MAX_PLAN_DEPTH: u32 = 12;

/// Truncated cosine series of a normalized integrand on a 2ⁿ-point grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub a0: f64,
    /// a_1..a_K; if K reaches N − 1 the last entry already carries the
    /// DCT-I factor of 1/2.
    pub coeffs: Vec<f64>,
    /// ω₀ = π/(N − 1), radians per grid index.
    pub fundamental: f64,
    pub order: usize,
    /// max over the grid of |f̃ − reconstruction|.
    pub tail_bound: f64,
    pub grid_size: usize,
    pub affine: AffineMap,
}

impl FourierSeries {
    /// a0/2 + Σ a_k cos(k ω₀ x).
    pub fn reconstruct(&self, x: usize) -> f64 {
        let x = x as f64;
        self.a0 / 2.0
            + self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| a * ((i + 1) as f64 * self.fundamental * x).cos())
                .sum::<f64>()
    }

    /// (k, a_k) for every coefficient that needs an estimate.
    pub fn active_harmonics(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.abs() > NEGLIGIBLE_COEFFICIENT)
            .map(|(i, &a)| (i + 1, a))
    }

    /// Σ p(x)·reconstruction(x): what an estimator with exact amplitudes returns.
    pub fn expectation(&self, dist: &DiscretizedDistribution) -> f64 {
        dist.probs()
            .iter()
            .enumerate()
            .map(|(x, p)| p * self.reconstruct(x))
            .sum()
    }
}

/// Type-I discrete cosine analysis of f̃ truncated at order K.
pub fn cosine_series(f: &BoundedFunction, order: usize) -> Result<FourierSeries> {
    let size = f.len();
    if size < 2 || !size.is_power_of_two() {
        return Err(Error::Shape(format!(
            "cosine series needs a 2ⁿ-point grid with n ≥ 1, got {size} points"
        )));
    }
    let last = size - 1;
    let omega0 = std::f64::consts::PI / last as f64;
    let g = f.normalized_values();
    let coefficient = |k: usize| -> f64 {
        let sum: f64 = g
            .iter()
            .enumerate()
            .map(|(x, v)| {
                let w = if x == 0 || x == last { 0.5 } else { 1.0 };
                w * v * (k as f64 * omega0 * x as f64).cos()
            })
            .sum();
        2.0 * sum / last as f64
    };
    let k_max = order.min(last);
    let mut coeffs: Vec<f64> = (1..=k_max).map(coefficient).collect();
    if k_max == last {
        if let Some(c) = coeffs.last_mut() {
            *c *= 0.5;
        }
    }
    let mut series = FourierSeries {
        a0: coefficient(0),
        coeffs,
        fundamental: omega0,
        order,
        tail_bound: 0.0,
        grid_size: size,
        affine: f.affine(),
    };
    series.tail_bound = g
        .iter()
        .enumerate()
        .map(|(x, v)| (v - series.reconstruct(x)).abs())
        .fold(0.0, f64::max);
    Ok(series)
}

/// Shots schedule for one harmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPlan {
    pub k: usize,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPlan {
    pub harmonics: Vec<HarmonicPlan>,
    pub total_q: u64,
}

impl BudgetPlan {
    pub fn planned_calls(&self) -> u64 {
        self.harmonics
            .iter()
            .map(|h| h.schedule.oracle_calls())
            .sum()
    }

    pub fn schedule_for(&self, k: usize) -> Option<&Schedule> {
        self.harmonics
            .iter()
            .find(|h| h.k == k)
            .map(|h| &h.schedule)
    }
}

/// Splits `total_q` across active harmonics in proportion to |a_k|^(2/3).
///
/// Each harmonic gets the deepest exponential schedule for which
/// `base_shots` shots per entry fit its share, then as many shots per entry
/// as the share allows; any remainder becomes extra m = 0 shots.
pub fn allocate_budget(
    series: &FourierSeries,
    total_q: u64,
    base_shots: u64,
) -> Result<BudgetPlan> {
    if base_shots == 0 {
        return Err(Error::Plan("base_shots must be at least 1".into()));
    }
    let active: Vec<(usize, f64)> = series.active_harmonics().collect();
    if active.is_empty() {
        return Ok(BudgetPlan {
            harmonics: Vec::new(),
            total_q,
        });
    }
    let weights: Vec<f64> = active
        .iter()
        .map(|(_, a)| a.abs().powf(2.0 / 3.0))
        .collect();
    let norm: f64 = weights.iter().sum();
    let min_share = weights.iter().copied().fold(f64::INFINITY, f64::min) / norm;
    let minimum = (base_shots as f64 / min_share).ceil() as u64;
    if total_q < minimum {
        return Err(Error::Plan(format!(
            "budget of {total_q} oracle calls cannot give every harmonic {base_shots} shots; the minimum feasible q is {minimum}"
        )));
    }
    let mut harmonics = Vec::with_capacity(active.len());
    for (&(k, _), w) in active.iter().zip(&weights) {
        let share = (total_q as f64 * w / norm).floor() as u64;
        let depth = (0..=MAX_PLAN_DEPTH)
            .rev()
            .find(|&d| base_shots * Schedule::calls_per_round(d) <= share)
            .ok_or_else(|| Error::Plan(format!("harmonic {k} share {share} is below one round")))?;
        let cost = Schedule::calls_per_round(depth);
        let shots = share / cost;
        // the remainder goes to extra m = 0 shots, one call each
        let mut entries = Schedule::exponential(depth, shots)?.entries().to_vec();
        entries[0].shots += share - shots * cost;
        harmonics.push(HarmonicPlan {
            k,
            schedule: Schedule::new(entries)?,
        });
    }
    Ok(BudgetPlan { harmonics, total_q })
}

/// How each harmonic amplitude is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicEstimator {
    Mle,
    NoiseAware,
    /// One phase-estimation run per harmonic with `t_qubits` evaluation qubits.
    Canonical {
        t_qubits: usize,
    },
}

/// Estimation run for one harmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicEstimate {
    pub k: usize,
    pub coefficient: f64,
    pub amplitude: AmplitudeEstimate,
    /// 1 − 2·â.
    pub cos_expectation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierEstimate {
    /// Estimate of E[f] in the integrand's own units.
    pub value: f64,
    /// Estimate of E[f̃], clamped to [0, 1].
    pub normalized: f64,
    /// Root-sum-square of |a_k|·(CI half-width of E[cos]) in normalized units.
    pub ci_half_width: f64,
    pub tail_bound: f64,
    pub oracle_calls: u64,
    pub harmonics: Vec<HarmonicEstimate>,
}

/// The estimation problem for harmonic k: state preparation of `dist`
/// followed by the (k·ω₀, 0) rotation oracle.
pub fn harmonic_problem(
    dist: &DiscretizedDistribution,
    series: &FourierSeries,
    k: usize,
) -> Result<EstimationProblem> {
    if dist.len() != series.grid_size {
        return Err(Error::Shape(format!(
            "distribution has {} points, series was built on {}",
            dist.len(),
            series.grid_size
        )));
    }
    let oracle = build_harmonic_oracle(
        &HarmonicSpec {
            omega: k as f64 * series.fundamental,
            phase: 0.0,
        },
        dist.n_qubits(),
    )?;
    EstimationProblem::new(synthesize_state_prep(dist)?, oracle)
}

/// Options for [`estimate_fourier`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourierOptions {
    /// Read exact probabilities instead of sampling; consumes no oracle calls.
    pub exact: bool,
    pub noise: Option<NoiseSpec>,
}

/// Ê[f̃] = a0/2 + Σ a_k·Ê[cos(kω₀x)], clamped to [0, 1] and mapped back to
/// the integrand's units. Harmonics run in parallel from seeds derived from
/// one draw of `rng`.
pub fn estimate_fourier<R: Rng + ?Sized>(
    dist: &DiscretizedDistribution,
    series: &FourierSeries,
    estimator: HarmonicEstimator,
    plan: &BudgetPlan,
    options: &FourierOptions,
    rng: &mut R,
) -> Result<FourierEstimate> {
    let active: Vec<(usize, f64)> = series.active_harmonics().collect();
    if !options.exact && !matches!(estimator, HarmonicEstimator::Canonical { .. }) {
        if let Some((k, _)) = active.iter().find(|(k, _)| plan.schedule_for(*k).is_none()) {
            return Err(Error::Plan(format!(
                "budget plan has no schedule for harmonic {k}"
            )));
        }
    }
    let base = rng.random::<u64>();
    let harmonics = active
        .par_iter()
        .map(|&(k, coefficient)| {
            let problem = harmonic_problem(dist, series, k)?;
            let mut r = seeded(derive_seed(base, &[k as u64]));
            let amplitude = if options.exact {
                AmplitudeEstimate::exact(Amplifier::new(&problem)?.probability(0)?)
            } else {
                match estimator {
                    HarmonicEstimator::Canonical { t_qubits } => {
                        canonical_qae(&problem, t_qubits, &mut r)?
                    }
                    HarmonicEstimator::Mle | HarmonicEstimator::NoiseAware => {
                        let schedule = plan.schedule_for(k).expect("checked above");
                        let run = run_schedule(&problem, schedule, options.noise.as_ref(), &mut r)?;
                        let mut est = if estimator == HarmonicEstimator::Mle {
                            mle_estimate(&run.records)?
                        } else {
                            noise_aware_mle(&run.records)?
                        };
                        est.oracle_calls = run.oracle_calls;
                        est
                    }
                }
            };
            Ok(HarmonicEstimate {
                k,
                coefficient,
                cos_expectation: 1.0 - 2.0 * amplitude.a_hat,
                amplitude,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let raw = series.a0 / 2.0
        + harmonics
            .iter()
            .map(|h| h.coefficient * h.cos_expectation)
            .sum::<f64>();
    let normalized = raw.clamp(0.0, 1.0);
    let ci_half_width = harmonics
        .iter()
        .map(|h| (h.coefficient * 2.0 * h.amplitude.half_width()).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FourierEstimate {
        value: series.affine.denormalize(normalized),
        normalized,
        ci_half_width,
        tail_bound: series.tail_bound,
        oracle_calls: harmonics.iter().map(|h| h.amplitude.oracle_calls).sum(),
        harmonics,
    })
}
