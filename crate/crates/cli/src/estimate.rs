//! `estimate`: one end-to-end estimation with its report.

use rand::Rng;
use serde::Serialize;

use qmci::data::classical_mc;
use qmci::estimate::{
    canonical_qae, mle_estimate, noise_aware_mle, run_schedule, AmplitudeEstimate, FitFlags,
    Schedule,
};
use qmci::fourier::{
    allocate_budget, cosine_series, estimate_fourier, BudgetPlan, FourierOptions, HarmonicEstimate,
};
use qmci::rng::seeded;

use crate::config::{EstimateConfig, Method};
use crate::error::{CliError, CliResult};
use crate::prepare::Prepared;

/// Deepest schedule picked when a budget rather than a depth is given.
pub const MAX_BUDGET_DEPTH: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub method: Method,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
    pub q: u64,
    pub truth: f64,
    pub abs_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<FitFlags>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<HarmonicEstimate>,
}

/// Schedule for the likelihood methods: budget-driven when `total_q` is set.
pub fn schedule_for(cfg: &EstimateConfig) -> CliResult<Schedule> {
    Ok(match cfg.total_q {
        Some(q) => Schedule::for_budget(q, cfg.shots, MAX_BUDGET_DEPTH)?,
        None => Schedule::exponential(cfg.depth, cfg.shots)?,
    })
}

fn from_amplitude(method: Method, prep: &Prepared, est: AmplitudeEstimate) -> EstimateReport {
    let affine = prep.f.affine();
    let value = affine.denormalize(est.a_hat);
    EstimateReport {
        method,
        estimate: value,
        ci_low: Some(affine.denormalize(est.ci_low)),
        ci_high: Some(affine.denormalize(est.ci_high)),
        q: est.oracle_calls,
        truth: prep.truth.value,
        abs_error: (value - prep.truth.value).abs(),
        lambda_hat: est.lambda_hat,
        flags: Some(est.flags),
        tail_bound: None,
        harmonics: Vec::new(),
    }
}

pub fn run_estimate<R: Rng + ?Sized>(
    prep: &Prepared,
    cfg: &EstimateConfig,
    rng: &mut R,
) -> CliResult<EstimateReport> {
    match cfg.method {
        Method::Classical => {
            let q = cfg.total_q.unwrap_or(10_000);
            let integrand = prep.integrand.clone();
            let value = classical_mc(&prep.model, |x| integrand.eval(x), q, rng)?;
            let truth = prep.continuous_truth()?;
            Ok(EstimateReport {
                method: cfg.method,
                estimate: value,
                ci_low: None,
                ci_high: None,
                q,
                truth,
                abs_error: (value - truth).abs(),
                lambda_hat: None,
                flags: None,
                tail_bound: None,
                harmonics: Vec::new(),
            })
        }
        Method::QmciMle | Method::QmciNoiseAware => {
            let problem = prep.table_problem()?;
            let est = if cfg.exact {
                AmplitudeEstimate::exact(problem.true_amplitude()?)
            } else {
                let run = run_schedule(&problem, &schedule_for(cfg)?, prep.noise.as_ref(), rng)?;
                let mut est = if cfg.method == Method::QmciMle {
                    mle_estimate(&run.records)?
                } else {
                    noise_aware_mle(&run.records)?
                };
                est.oracle_calls = run.oracle_calls;
                est
            };
            Ok(from_amplitude(cfg.method, prep, est))
        }
        Method::QmciCanonical => {
            if prep.noise.is_some() {
                return Err(CliError::Config(
                    "the canonical estimator runs without noise; set p_error to 0".into(),
                ));
            }
            let problem = prep.table_problem()?;
            let est = if cfg.exact {
                AmplitudeEstimate::exact(problem.true_amplitude()?)
            } else {
                canonical_qae(&problem, cfg.t_qubits, rng)?
            };
            Ok(from_amplitude(cfg.method, prep, est))
        }
        Method::QmciFourier => {
            let series = cosine_series(&prep.f, cfg.order)?;
            let plan = if cfg.exact {
                BudgetPlan {
                    harmonics: Vec::new(),
                    total_q: 0,
                }
            } else {
                allocate_budget(&series, cfg.total_q.unwrap_or(100_000), cfg.shots)?
            };
            let opts = FourierOptions {
                exact: cfg.exact,
                noise: prep.noise,
            };
            let estimator = cfg.harmonic_estimator.resolve(cfg.t_qubits);
            let e = estimate_fourier(&prep.dist, &series, estimator, &plan, &opts, rng)?;
            let scale = prep.f.affine().scale();
            Ok(EstimateReport {
                method: cfg.method,
                estimate: e.value,
                ci_low: Some(e.value - scale * e.ci_half_width),
                ci_high: Some(e.value + scale * e.ci_half_width),
                q: e.oracle_calls,
                truth: prep.truth.value,
                abs_error: (e.value - prep.truth.value).abs(),
                lambda_hat: None,
                flags: None,
                tail_bound: Some(scale * e.tail_bound),
                harmonics: e.harmonics,
            })
        }
    }
}

/// Convenience wrapper seeding the run from `seed`.
pub fn estimate_with_seed(
    prep: &Prepared,
    cfg: &EstimateConfig,
    seed: u64,
) -> CliResult<EstimateReport> {
    run_estimate(prep, cfg, &mut seeded(seed))
}
