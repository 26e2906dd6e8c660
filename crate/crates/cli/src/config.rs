//! JSON run configuration. Every section rejects unknown keys.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qmci::data::ModelFamily;
use qmci::encode::Family;
use qmci::fourier::HarmonicEstimator;
use qmci::oracle::Integrand;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub problem: Option<ProblemConfig>,
    pub estimate: Option<EstimateConfig>,
    pub converge: Option<ConvergeConfig>,
    pub grover: Option<GroverConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn problem(&self) -> CliResult<&ProblemConfig> {
        self.problem
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"problem\" section".into()))
    }
}

/// Dataset to fit before discretizing.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub family: ModelFamily,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Parametric model; exclusive with `dataset`.
    pub model: Option<Family>,
    pub dataset: Option<DatasetConfig>,
    /// Discretization range; defaults to the family's own.
    pub range: Option<[f64; 2]>,
    #[serde(default = "default_integrand")]
    pub integrand: Integrand,
    #[serde(default = "default_qubits")]
    pub n_qubits: usize,
    /// Depolarizing error probability per gate.
    #[serde(default)]
    pub p_error: f64,
}

fn default_integrand() -> Integrand {
    Integrand::Relu { threshold: 0.0 }
}

fn default_qubits() -> usize {
    6
}

impl ProblemConfig {
    pub fn validate(&self) -> CliResult<()> {
        match (&self.model, &self.dataset) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either \"model\" or \"dataset\", not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "problem needs a \"model\" or a \"dataset\"".into(),
                ))
            }
            _ => {}
        }
        if let Some([lo, hi]) = self.range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CliError::Config(format!(
                    "range [{lo}, {hi}] must be finite with lo < hi"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.p_error) {
            return Err(CliError::Config(format!(
                "p_error {} must lie in [0, 1]",
                self.p_error
            )));
        }
        Ok(())
    }
}

/// Estimation methods, named as in the convergence CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Classical,
    QmciMle,
    QmciCanonical,
    QmciFourier,
    QmciNoiseAware,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::QmciMle => "qmci-mle",
            Method::QmciCanonical => "qmci-canonical",
            Method::QmciFourier => "qmci-fourier",
            Method::QmciNoiseAware => "qmci-noise-aware",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicEstimatorName {
    Mle,
    NoiseAware,
    Canonical,
}

impl HarmonicEstimatorName {
    pub fn resolve(self, t_qubits: usize) -> HarmonicEstimator {
        match self {
            HarmonicEstimatorName::Mle => HarmonicEstimator::Mle,
            HarmonicEstimatorName::NoiseAware => HarmonicEstimator::NoiseAware,
            HarmonicEstimatorName::Canonical => HarmonicEstimator::Canonical { t_qubits },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub method: Method,
    /// Exponential schedule depth for the likelihood methods.
    #[serde(default = "default_depth")]
    pub depth: u32,
    /// Shots per schedule entry (target shots when `total_q` is set).
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Oracle-call budget; samples for `classical`.
    pub total_q: Option<u64>,
    #[serde(default = "default_t")]
    pub t_qubits: usize,
    /// Fourier truncation order K.
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_harmonic")]
    pub harmonic_estimator: HarmonicEstimatorName,
    /// Read exact probabilities instead of sampling.
    #[serde(default)]
    pub exact: bool,
}

fn default_depth() -> u32 {
    6
}
fn default_shots() -> u64 {
    24
}
fn default_t() -> usize {
    6
}
fn default_order() -> usize {
    10
}
fn default_harmonic() -> HarmonicEstimatorName {
    HarmonicEstimatorName::Mle
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub methods: Vec<Method>,
    pub q_grid: Vec<u64>,
    pub trials: u64,
    /// Target shots per schedule entry.
    #[serde(default = "default_shots")]
    pub base_shots: u64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_harmonic")]
    pub harmonic_estimator: HarmonicEstimatorName,
    #[serde(default = "default_t")]
    pub t_qubits: usize,
}

impl ConvergeConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.methods.is_empty() {
            return Err(CliError::Config(
                "converge needs at least one method".into(),
            ));
        }
        if self.q_grid.len() < 5 {
            return Err(CliError::Config(format!(
                "q_grid has {} points, at least 5 required",
                self.q_grid.len()
            )));
        }
        if self.q_grid.contains(&0) {
            return Err(CliError::Config("q_grid entries must be positive".into()));
        }
        if self.trials < 50 {
            return Err(CliError::Config(format!(
                "{} trials requested, at least 50 required",
                self.trials
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroverConfig {
    #[serde(default = "default_search_qubits")]
    pub n_qubits: usize,
    #[serde(default)]
    pub marked: usize,
    #[serde(default = "default_search_shots")]
    pub shots: u64,
}

fn default_search_qubits() -> usize {
    4
}
fn default_search_shots() -> u64 {
    1000
}

impl Default for GroverConfig {
    fn default() -> Self {
        GroverConfig {
            n_qubits: default_search_qubits(),
            marked: 0,
            shots: default_search_shots(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let cfg = RunConfig::from_json(
            r#"{
                "seed": 11,
                "problem": {
                    "model": {"family": "gaussian", "mean": 0.0, "std_dev": 1.0},
                    "integrand": {"name": "identity"},
                    "n_qubits": 5
                },
                "estimate": {"method": "qmci-fourier", "exact": true, "order": 8},
                "converge": {"methods": ["classical", "qmci-mle"], "q_grid": [64, 128, 256, 512, 1024], "trials": 50}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 11);
        let p = cfg.problem().unwrap();
        p.validate().unwrap();
        assert_eq!(p.integrand, Integrand::Identity);
        assert_eq!(cfg.estimate.unwrap().method, Method::QmciFourier);
        cfg.converge.unwrap().validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_json(r#"{"sed": 1}"#).is_err());
        assert!(RunConfig::from_json(
            r#"{"problem": {"model": {"family": "gaussian", "mean": 0, "std_dev": 1}, "qubits": 3}}"#
        )
        .is_err());
        assert!(
            RunConfig::from_json(r#"{"estimate": {"method": "qmci-mle", "dept": 3}}"#).is_err()
        );
    }

    #[test]
    fn problem_source_is_exclusive() {
        let cfg = RunConfig::from_json(r#"{"problem": {"n_qubits": 3}}"#).unwrap();
        assert!(matches!(
            cfg.problem().unwrap().validate(),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn converge_limits() {
        let c = ConvergeConfig {
            methods: vec![Method::Classical],
            q_grid: vec![1, 2, 3, 4],
            trials: 50,
            base_shots: 24,
            order: 10,
            harmonic_estimator: HarmonicEstimatorName::Mle,
            t_qubits: 6,
        };
        assert!(c.validate().is_err());
        let c = ConvergeConfig {
            q_grid: vec![1, 2, 3, 4, 5],
            trials: 49,
            ..c
        };
        assert!(c.validate().is_err());
    }
}
