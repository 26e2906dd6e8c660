//! `slope`: log-log least squares of MSE on q, per method.

use serde::Serialize;

use crate::converge::ConvergenceRow;
use crate::error::{CliError, CliResult};

pub const MIN_ROWS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub method: String,
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub points: usize,
}

impl SlopeFit {
    /// Fitted MSE at `q`.
    pub fn predict(&self, q: f64) -> f64 {
        (self.intercept + self.slope * q.ln()).exp()
    }
}

/// Ordinary least squares of ln(mse) on ln(q) with the slope's standard error.
pub fn fit_points(method: &str, points: &[(f64, f64)]) -> CliResult<SlopeFit> {
    if points.len() < MIN_ROWS {
        return Err(CliError::Config(format!(
            "method {method} has {} rows, at least {MIN_ROWS} required",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(q, mse)| !(*q > 0.0 && *mse > 0.0)) {
        return Err(CliError::Config(format!(
            "method {method}: q and mse must be positive, got {p:?}"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CliError::Config(format!(
            "method {method}: all rows share one q"
        )));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let std_error = (sse / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        method: method.to_string(),
        slope,
        std_error,
        intercept,
        points: points.len(),
    })
}

/// One fit per method, in order of first appearance.
pub fn fit_slopes(rows: &[ConvergenceRow]) -> CliResult<Vec<SlopeFit>> {
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    if methods.is_empty() {
        return Err(CliError::Config("no rows to fit".into()));
    }
    methods
        .into_iter()
        .map(|m| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.method == m)
                .map(|r| (r.q as f64, r.mse))
                .collect();
            fit_points(m, &pts)
        })
        .collect()
}
