//! Classical front end and baselines: dataset loading, parametric fits,
//! i.i.d. Monte Carlo and the exact grid sum.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::encode::{DiscretizedDistribution, Family};
use crate::error::{Error, Result};
use crate::oracle::BoundedFunction;

/// Observations read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub values: Vec<f64>,
    pub source_path: String,
}

/// Reads one number per line. A non-numeric first line is taken as a header;
/// blank lines are ignored. Any other non-numeric line is an error that
/// lists the offending line numbers.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_values(&text, &path.display().to_string())
}

fn parse_values(text: &str, source: &str) -> Result<Dataset> {
    let mut values = Vec::new();
    let mut rejected = Vec::new();
    let mut first_content = true;
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => rejected.push(i + 1),
            Err(_) if first_content => {}
            Err(_) => rejected.push(i + 1),
        }
        first_content = false;
    }
    if !rejected.is_empty() {
        return Err(Error::Parse(format!(
            "{source}: non-numeric rows at lines {rejected:?}"
        )));
    }
    if values.is_empty() {
        return Err(Error::Parse(format!("{source}: no valid rows")));
    }
    Ok(Dataset {
        values,
        source_path: source.to_string(),
    })
}

/// Parametric families a dataset can be fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Gaussian,
    Lognormal,
    Uniform,
}

/// Maximum-likelihood fit of a [`ModelFamily`].
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub family: Family,
    pub log_likelihood: f64,
    pub n_observations: usize,
}

/// JSON form: `{family, parameters, n_observations}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedModelRecord {
    pub family: ModelFamily,
    pub parameters: ModelParameters,
    pub n_observations: usize,
}

/// Parameters of a fitted family, keyed by name in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelParameters {
    Gaussian { mean: f64, std_dev: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Uniform { low: f64, high: f64 },
}

impl FittedModel {
    pub fn record(&self) -> FittedModelRecord {
        let (family, parameters) = match self.family {
            Family::Gaussian { mean, std_dev } => (
                ModelFamily::Gaussian,
                ModelParameters::Gaussian { mean, std_dev },
            ),
            Family::LogNormal { mu, sigma } => (
                ModelFamily::Lognormal,
                ModelParameters::Lognormal { mu, sigma },
            ),
            Family::Uniform { low, high } => {
                (ModelFamily::Uniform, ModelParameters::Uniform { low, high })
            }
            Family::Explicit { .. } => unreachable!("fits never produce explicit families"),
        };
        FittedModelRecord {
            family,
            parameters,
            n_observations: self.n_observations,
        }
    }

    /// A model from known parameters (no data, zero log-likelihood).
    pub fn from_family(family: Family) -> Result<Self> {
        if matches!(family, Family::Explicit { .. }) {
            return Err(Error::Domain(
                "explicit weights are not a continuous model".into(),
            ));
        }
        family.validate()?;
        Ok(FittedModel {
            family,
            log_likelihood: 0.0,
            n_observations: 0,
        })
    }

    /// Draws one value from the continuous model.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }

    fn sampler(&self) -> Sampler {
        match self.family {
            Family::Gaussian { mean, std_dev } => {
                Sampler::Normal(Normal::new(mean, std_dev).expect("validated"))
            }
            Family::LogNormal { mu, sigma } => {
                Sampler::LogNormal(LogNormal::new(mu, sigma).expect("validated"))
            }
            Family::Uniform { low, high } => {
                Sampler::Uniform(Uniform::new_inclusive(low, high).expect("validated"))
            }
            Family::Explicit { .. } => unreachable!(),
        }
    }
}

enum Sampler {
    Normal(Normal<f64>),
    LogNormal(LogNormal<f64>),
    Uniform(Uniform<f64>),
}

impl Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::LogNormal(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
        }
    }
}

fn mean_and_population_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    let var = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
    (mean, var.sqrt())
}

/// Maximum-likelihood fit. Gaussian uses the population (1/N) variance;
/// lognormal fits a Gaussian to log-data; uniform takes (min, max).
pub fn fit_model(data: &Dataset, family: ModelFamily) -> Result<FittedModel> {
    let v = &data.values;
    if v.is_empty() {
        return Err(Error::Domain("cannot fit an empty dataset".into()));
    }
    let n = v.len() as f64;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let (fam, ll) = match family {
        ModelFamily::Gaussian => {
            let (mean, sd) = mean_and_population_sd(v);
            if sd <= 0.0 {
                return Err(Error::Domain(format!(
                    "degenerate fit: all observations equal {mean} (sigma = 0)"
                )));
            }
            // at the MLE the quadratic term sums to n/2
            let ll = -0.5 * n * (ln2pi + 2.0 * sd.ln() + 1.0);
            (Family::Gaussian { mean, std_dev: sd }, ll)
        }
        ModelFamily::Lognormal => {
            if let Some(bad) = v.iter().find(|x| **x <= 0.0) {
                return Err(Error::Domain(format!(
                    "lognormal fit needs positive data, found {bad}"
                )));
            }
            let logs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
            let (mu, sigma) = mean_and_population_sd(&logs);
            if sigma <= 0.0 {
                return Err(Error::Domain(
                    "degenerate fit: log-data has zero spread".into(),
                ));
            }
            let sum_logs = neumaier_sum(logs.iter().copied());
            let ll = -0.5 * n * (ln2pi + 2.0 * sigma.ln() + 1.0) - sum_logs;
            (Family::LogNormal { mu, sigma }, ll)
        }
        ModelFamily::Uniform => {
            let low = v.iter().copied().fold(f64::INFINITY, f64::min);
            let high = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if low >= high {
                return Err(Error::Domain(format!(
                    "degenerate fit: all observations equal {low}"
                )));
            }
            (Family::Uniform { low, high }, -n * (high - low).ln())
        }
    };
    Ok(FittedModel {
        family: fam,
        log_likelihood: ll,
        n_observations: v.len(),
    })
}

/// Plain i.i.d. Monte Carlo: (1/q)·Σ f(Xᵢ) with Xᵢ drawn from the model.
pub fn classical_mc<R, F>(model: &FittedModel, f: F, q: u64, rng: &mut R) -> Result<f64>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> f64,
{
    if q == 0 {
        return Err(Error::Domain("classical Monte Carlo needs q >= 1".into()));
    }
    let sampler = model.sampler();
    let sum = neumaier_sum((0..q).map(|_| f(sampler.sample(rng))));
    Ok(sum / q as f64)
}

/// Exact grid expectation in both normalized and physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForce {
    /// Σ p(x)·f̃(x).
    pub normalized: f64,
    /// Σ p(x)·f(x) recovered through the affine map.
    pub value: f64,
}

pub fn brute_force_expectation(
    dist: &DiscretizedDistribution,
    f: &BoundedFunction,
) -> Result<BruteForce> {
    if dist.len() != f.len() {
        return Err(Error::Shape(format!(
            "distribution has {} points, integrand has {}",
            dist.len(),
            f.len()
        )));
    }
    let normalized = neumaier_sum(
        dist.probs()
            .iter()
            .zip(f.normalized_values())
            .map(|(p, v)| p * v),
    );
    Ok(BruteForce {
        normalized,
        value: f.affine().denormalize(normalized),
    })
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{discretize, explicit};
    use crate::oracle::normalize_function;
    use crate::rng::seeded;

    fn ds(values: &[f64]) -> Dataset {
        Dataset {
            values: values.to_vec(),
            source_path: "mem".into(),
        }
    }

    #[test]
    fn parses_plain_and_header() {
        assert_eq!(
            parse_values("1.0\n2.0\n3.0", "t").unwrap().values,
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            parse_values("value\n4\n\n5\n", "t").unwrap().values,
            vec![4.0, 5.0]
        );
        assert!(matches!(parse_values("", "t"), Err(Error::Parse(_))));
        assert!(matches!(parse_values("value\n", "t"), Err(Error::Parse(_))));
        let err = parse_values("1\nx\n3\ny", "t").unwrap_err();
        assert!(err.to_string().contains("[2, 4]"), "{err}");
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_csv("/definitely/not/here.csv"),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn degenerate_and_domain_fits() {
        assert!(matches!(
            fit_model(&ds(&[0.0; 4]), ModelFamily::Gaussian),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fit_model(&ds(&[1.0, -1.0]), ModelFamily::Lognormal),
            Err(Error::Domain(_))
        ));
        assert!(fit_model(&ds(&[2.0, 2.0]), ModelFamily::Uniform).is_err());
    }

    #[test]
    fn symmetric_data_mean() {
        let m = fit_model(&ds(&[3.0, 4.0, 5.0, 6.0, 7.0]), ModelFamily::Gaussian).unwrap();
        match m.family {
            Family::Gaussian { mean, std_dev } => {
                assert_eq!(mean, 5.0);
                assert!((std_dev - 2f64.sqrt()).abs() < 1e-15);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn gaussian_log_likelihood_matches_direct_sum() {
        let data = [0.3, 1.7, -0.4, 2.2, 0.9];
        let m = fit_model(&ds(&data), ModelFamily::Gaussian).unwrap();
        let direct: f64 = data.iter().map(|&x| m.family.density(x).ln()).sum();
        assert!((m.log_likelihood - direct).abs() < 1e-12);
        let m = fit_model(&ds(&data.map(|x: f64| x.exp())), ModelFamily::Lognormal).unwrap();
        let direct: f64 = data.iter().map(|&x| m.family.density(x.exp()).ln()).sum();
        assert!((m.log_likelihood - direct).abs() < 1e-12);
    }

    #[test]
    fn record_serializes_three_fields() {
        let m = fit_model(&ds(&[1.0, 3.0]), ModelFamily::Uniform).unwrap();
        let json = serde_json::to_value(m.record()).unwrap();
        assert_eq!(json["family"], "uniform");
        assert_eq!(json["parameters"]["low"], 1.0);
        assert_eq!(json["n_observations"], 2);
        assert_eq!(json.as_object().unwrap().len(), 3);
    }

    #[test]
    fn constant_integrand_is_exact() {
        let m = FittedModel::from_family(Family::Gaussian {
            mean: 0.0,
            std_dev: 1.0,
        })
        .unwrap();
        for q in [1, 7, 1000] {
            assert_eq!(classical_mc(&m, |_| 2.5, q, &mut seeded(q)).unwrap(), 2.5);
        }
        assert!(classical_mc(&m, |_| 2.5, 0, &mut seeded(0)).is_err());
    }

    #[test]
    fn brute_force_basics() {
        let d = discretize(
            &Family::Uniform {
                low: 0.0,
                high: 1.0,
            },
            3,
            0.0,
            1.0,
        )
        .unwrap();
        let ones = normalize_function(&[1.0; 8], Some(0.0), Some(1.0)).unwrap();
        assert_eq!(brute_force_expectation(&d, &ones).unwrap().normalized, 1.0);
        let half =
            normalize_function(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0], None, None).unwrap();
        assert_eq!(brute_force_expectation(&d, &half).unwrap().normalized, 0.5);
        let short = normalize_function(&[1.0; 4], None, None).unwrap();
        assert!(matches!(
            brute_force_expectation(&d, &short),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn brute_force_matches_naive_sum() {
        let mut rng = seeded(2024);
        let n = 10;
        let p: Vec<f64> = (0..1 << n).map(|_| rng.random::<f64>()).collect();
        let d = explicit(p).unwrap();
        let raw: Vec<f64> = (0..1 << n)
            .map(|_| rng.random::<f64>() * 10.0 - 3.0)
            .collect();
        let f = normalize_function(&raw, None, None).unwrap();
        let mut naive = 0.0;
        for (pi, fi) in d.probs().iter().zip(f.normalized_values()) {
            naive += pi * fi;
        }
        let bf = brute_force_expectation(&d, &f).unwrap();
        assert!((bf.normalized - naive).abs() < 1e-12);
        let naive_raw: f64 = d.probs().iter().zip(&raw).map(|(p, v)| p * v).sum();
        assert!((bf.value - naive_raw).abs() < 1e-12);
    }

    #[test]
    fn neumaier_beats_naive() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(vals), 2.0);
    }
}
