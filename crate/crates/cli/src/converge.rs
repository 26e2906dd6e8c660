//! `converge`: MSE against oracle calls for each method, and the CSV form.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;

use qmci::data::classical_mc;
use qmci::estimate::{
    estimate_from_outcome, mle_estimate, noise_aware_mle, qae_outcome_distribution, run_schedule,
    sample_schedule, Amplifier, Schedule,
};
use qmci::fourier::{allocate_budget, cosine_series, estimate_fourier, FourierOptions};
use qmci::rng::{derive_seed, label_hash, seeded, SimRng};

use crate::config::{ConvergeConfig, Method};
use crate::error::{CliError, CliResult};
use crate::estimate::MAX_BUDGET_DEPTH;
use crate::format::g17;
use crate::prepare::Prepared;

pub const CSV_HEADER: &str = "method,q,trials,mse,truth";

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub method: String,
    pub q: u64,
    pub trials: u64,
    pub mse: f64,
    pub truth: f64,
}

/// Runs every (method, q) cell. Trial seeds are
/// derive_seed(seed, [label_hash(method), q, trial]), so the table is a pure
/// function of the config.
pub fn run_converge(
    prep: &Prepared,
    cfg: &ConvergeConfig,
    seed: u64,
) -> CliResult<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let tag = label_hash(method.label());
        let rng_for = |q: u64, trial: u64| seeded(derive_seed(seed, &[tag, q, trial]));
        match method {
            Method::Classical => rows.extend(classical_rows(prep, cfg, &rng_for)?),
            Method::QmciMle | Method::QmciNoiseAware => {
                rows.extend(likelihood_rows(prep, cfg, method, &rng_for)?)
            }
            Method::QmciCanonical => rows.extend(canonical_rows(prep, cfg, &rng_for)?),
            Method::QmciFourier => rows.extend(fourier_rows(prep, cfg, &rng_for)?),
        }
    }
    Ok(rows)
}

fn mean_square(errors: impl IntoIterator<Item = f64>, trials: u64) -> f64 {
    qmci::data::neumaier_sum(errors.into_iter().map(|e| e * e)) / trials as f64
}

fn classical_rows(
    prep: &Prepared,
    cfg: &ConvergeConfig,
    rng_for: &(dyn Fn(u64, u64) -> SimRng + Sync),
) -> CliResult<Vec<ConvergenceRow>> {
    let truth = prep.continuous_truth()?;
    let f = &prep.integrand;
    cfg.q_grid
        .iter()
        .map(|&q| {
            let errs = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    Ok(classical_mc(&prep.model, |x| f.eval(x), q, &mut rng_for(q, t))? - truth)
                })
                .collect::<CliResult<Vec<f64>>>()?;
            Ok(ConvergenceRow {
                method: Method::Classical.label().into(),
                q,
                trials: cfg.trials,
                mse: mean_square(errs, cfg.trials),
                truth,
            })
        })
        .collect()
}

fn likelihood_rows(
    prep: &Prepared,
    cfg: &ConvergeConfig,
    method: Method,
    rng_for: &(dyn Fn(u64, u64) -> SimRng + Sync),
) -> CliResult<Vec<ConvergenceRow>> {
    let problem = prep.table_problem()?;
    let mut amp = Amplifier::new(&problem)?;
    let affine = prep.f.affine();
    let truth = prep.truth.value;
    let mut rows = Vec::new();
    for &q in &cfg.q_grid {
        let schedule = Schedule::for_budget(q, cfg.base_shots, MAX_BUDGET_DEPTH)?;
        let probs = match prep.noise {
            None => Some(
                schedule
                    .entries()
                    .iter()
                    .map(|e| amp.probability(e.iterations))
                    .collect::<qmci::Result<Vec<_>>>()?,
            ),
            Some(_) => None,
        };
        let results = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_for(q, t);
                let run = match &probs {
                    Some(p) => sample_schedule(&schedule, p, &mut rng)?,
                    None => run_schedule(&problem, &schedule, prep.noise.as_ref(), &mut rng)?,
                };
                let est = if method == Method::QmciMle {
                    mle_estimate(&run.records)?
                } else {
                    noise_aware_mle(&run.records)?
                };
                Ok((affine.denormalize(est.a_hat) - truth, run.oracle_calls))
            })
            .collect::<CliResult<Vec<(f64, u64)>>>()?;
        // every trial spends the same budget; the row reports what was simulated
        let used = results[0].1;
        if results.iter().any(|r| r.1 != used) || used != schedule.oracle_calls() {
            return Err(CliError::Config(format!(
                "oracle-call accounting mismatch at q = {q}"
            )));
        }
        rows.push(ConvergenceRow {
            method: method.label().into(),
            q: used,
            trials: cfg.trials,
            mse: mean_square(results.into_iter().map(|r| r.0), cfg.trials),
            truth,
        });
    }
    Ok(rows)
}

fn canonical_rows(
    prep: &Prepared,
    cfg: &ConvergeConfig,
    rng_for: &(dyn Fn(u64, u64) -> SimRng + Sync),
) -> CliResult<Vec<ConvergenceRow>> {
    if prep.noise.is_some() {
        return Err(CliError::Config(
            "the canonical estimator runs without noise; set p_error to 0".into(),
        ));
    }
    let problem = prep.table_problem()?;
    let affine = prep.f.affine();
    let truth = prep.truth.value;
    // largest t with 2^(t+1) − 1 ≤ q, each t once
    let ts: BTreeSet<usize> = cfg
        .q_grid
        .iter()
        .map(|&q| {
            ((q + 1).ilog2() as usize)
                .saturating_sub(1)
                .clamp(1, qmci::estimate::MAX_EVAL_QUBITS)
        })
        .collect();
    let mut rows = Vec::new();
    for t in ts {
        let dist = qae_outcome_distribution(&problem, t)?;
        let pick = WeightedIndex::new(&dist).map_err(|e| CliError::Config(e.to_string()))?;
        let q = qmci::estimate::canonical_oracle_calls(t);
        let errs: Vec<f64> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let y = pick.sample(&mut rng_for(q, trial));
                affine.denormalize(estimate_from_outcome(y, t).a_hat) - truth
            })
            .collect();
        rows.push(ConvergenceRow {
            method: Method::QmciCanonical.label().into(),
            q,
            trials: cfg.trials,
            mse: mean_square(errs, cfg.trials),
            truth,
        });
    }
    Ok(rows)
}

fn fourier_rows(
    prep: &Prepared,
    cfg: &ConvergeConfig,
    rng_for: &(dyn Fn(u64, u64) -> SimRng + Sync),
) -> CliResult<Vec<ConvergenceRow>> {
    let series = cosine_series(&prep.f, cfg.order)?;
    let estimator = cfg.harmonic_estimator.resolve(cfg.t_qubits);
    let opts = FourierOptions {
        exact: false,
        noise: prep.noise,
    };
    let truth = prep.truth.value;
    let mut rows = Vec::new();
    for &q in &cfg.q_grid {
        let plan = allocate_budget(&series, q, cfg.base_shots)?;
        let results = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let e = estimate_fourier(
                    &prep.dist,
                    &series,
                    estimator,
                    &plan,
                    &opts,
                    &mut rng_for(q, t),
                )?;
                Ok((e.value - truth, e.oracle_calls))
            })
            .collect::<CliResult<Vec<(f64, u64)>>>()?;
        rows.push(ConvergenceRow {
            method: Method::QmciFourier.label().into(),
            q: results[0].1,
            trials: cfg.trials,
            mse: mean_square(results.into_iter().map(|r| r.0), cfg.trials),
            truth,
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.method,
            r.q,
            r.trials,
            g17(r.mse),
            g17(r.truth)
        );
    }
    out
}

pub fn parse_csv(text: &str) -> CliResult<Vec<ConvergenceRow>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(CliError::Config(format!(
                "expected header \"{CSV_HEADER}\""
            )))
        }
    }
    lines
        .map(|(i, line)| {
            let bad = |what: &str| CliError::Config(format!("line {}: {what}", i + 1));
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(bad("expected 5 columns"));
            }
            Ok(ConvergenceRow {
                method: cols[0].to_string(),
                q: cols[1].parse().map_err(|_| bad("q is not an integer"))?,
                trials: cols[2]
                    .parse()
                    .map_err(|_| bad("trials is not an integer"))?,
                mse: cols[3].parse().map_err(|_| bad("mse is not a number"))?,
                truth: cols[4].parse().map_err(|_| bad("truth is not a number"))?,
            })
        })
        .collect()
}
