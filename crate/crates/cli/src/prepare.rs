//! Model → grid → integrand, shared by every subcommand.

use qmci::data::{brute_force_expectation, fit_model, load_csv, BruteForce, FittedModel};
use qmci::encode::{discretize, synthesize_state_prep, DiscretizedDistribution, Family};
use qmci::estimate::EstimationProblem;
use qmci::oracle::{build_table_oracle, normalize_function, BoundedFunction, Integrand};
use qmci::sim::NoiseSpec;

use crate::config::ProblemConfig;
use crate::error::{CliError, CliResult};

/// Grid used for the continuous-model reference value.
const REFERENCE_QUBITS: usize = 20;

#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: FittedModel,
    pub integrand: Integrand,
    pub dist: DiscretizedDistribution,
    pub f: BoundedFunction,
    /// Exact expectation on the grid.
    pub truth: BruteForce,
    pub noise: Option<NoiseSpec>,
}

impl Prepared {
    pub fn n_qubits(&self) -> usize {
        self.dist.n_qubits()
    }

    /// State preparation plus the 2ⁿ-rotation table oracle.
    pub fn table_problem(&self) -> CliResult<EstimationProblem> {
        let sp = synthesize_state_prep(&self.dist)?;
        Ok(EstimationProblem::new(
            sp,
            build_table_oracle(&self.f, self.n_qubits())?,
        )?)
    }

    /// E[f] under the continuous model, by midpoint quadrature on a 2²⁰
    /// grid over the family's default range. This is what i.i.d. sampling
    /// from the model converges to.
    pub fn continuous_truth(&self) -> CliResult<f64> {
        let (lo, hi) = self
            .model
            .family
            .default_range()
            .ok_or_else(|| CliError::Config("model has no default range".into()))?;
        let fine = discretize(&self.model.family, REFERENCE_QUBITS, lo, hi)?;
        let raw = self.integrand.on_grid(&fine.coordinates());
        Ok(qmci::data::neumaier_sum(
            fine.probs().iter().zip(&raw).map(|(p, v)| p * v),
        ))
    }
}

pub fn model_from(cfg: &ProblemConfig) -> CliResult<FittedModel> {
    cfg.validate()?;
    match (&cfg.model, &cfg.dataset) {
        (Some(family), None) => {
            if matches!(family, Family::Explicit { .. }) {
                return Err(CliError::Config(
                    "explicit weights are not supported as a model".into(),
                ));
            }
            Ok(FittedModel::from_family(family.clone())?)
        }
        (None, Some(ds)) => Ok(fit_model(&load_csv(&ds.path)?, ds.family)?),
        _ => unreachable!("validated"),
    }
}

pub fn prepare(cfg: &ProblemConfig) -> CliResult<Prepared> {
    let model = model_from(cfg)?;
    let (lo, hi) = match cfg.range {
        Some([lo, hi]) => (lo, hi),
        None => model
            .family
            .default_range()
            .expect("parametric families have a range"),
    };
    let dist = discretize(&model.family, cfg.n_qubits, lo, hi)?;
    let f = normalize_function(&cfg.integrand.on_grid(&dist.coordinates()), None, None)?;
    let truth = brute_force_expectation(&dist, &f)?;
    let noise = if cfg.p_error > 0.0 {
        Some(NoiseSpec::depolarizing(cfg.p_error)?)
    } else {
        None
    };
    Ok(Prepared {
        model,
        integrand: cfg.integrand.clone(),
        dist,
        f,
        truth,
        noise,
    })
}
