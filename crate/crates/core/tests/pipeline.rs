use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use qmci::data::*;
use qmci::encode::{discretize, explicit, Family};
use qmci::error::Error;
use qmci::oracle::{normalize_function, Integrand};
use qmci::rng::{derive_seed, seeded};

fn write_temp(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn csv_loading() {
    let f = write_temp("1.0\n2.0\n3.0");
    assert_eq!(load_csv(f.path()).unwrap().values, vec![1.0, 2.0, 3.0]);

    let f = write_temp("value\n4.5\n-1e3\n\n2\n");
    assert_eq!(load_csv(f.path()).unwrap().values, vec![4.5, -1000.0, 2.0]);

    let f = write_temp("");
    assert!(matches!(load_csv(f.path()), Err(Error::Parse(_))));

    let f = write_temp("value\n1\nabc\n2\nxyz\n");
    match load_csv(f.path()) {
        Err(Error::Parse(msg)) => assert!(msg.contains("[3, 5]"), "{msg}"),
        other => panic!("{other:?}"),
    }

    assert!(matches!(
        load_csv("/nonexistent/data.csv"),
        Err(Error::Io(_))
    ));
}

fn dataset(values: Vec<f64>) -> Dataset {
    Dataset {
        values,
        source_path: "memory".into(),
    }
}

#[test]
fn fits() {
    assert!(matches!(
        fit_model(&dataset(vec![0.0; 4]), ModelFamily::Gaussian),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        fit_model(&dataset(vec![1.0, -2.0]), ModelFamily::Lognormal),
        Err(Error::Domain(_))
    ));

    let m = fit_model(&dataset(vec![3.0, 4.0, 6.0, 7.0]), ModelFamily::Gaussian).unwrap();
    match m.family {
        Family::Gaussian { mean, std_dev } => {
            assert_eq!(mean, 5.0);
            assert!((std_dev - 2.5f64.sqrt()).abs() < 1e-15);
        }
        ref other => panic!("{other:?}"),
    }

    let m = fit_model(&dataset(vec![2.0, 0.5, 3.0]), ModelFamily::Uniform).unwrap();
    assert_eq!(
        m.family,
        Family::Uniform {
            low: 0.5,
            high: 3.0
        }
    );
}

#[test]
fn gaussian_parameter_recovery() {
    let mut rng = seeded(17);
    let normal = Normal::new(2.0, 0.5).unwrap();
    let values: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
    match fit_model(&dataset(values), ModelFamily::Gaussian)
        .unwrap()
        .family
    {
        Family::Gaussian { mean, std_dev } => {
            assert!((mean - 2.0).abs() < 0.01, "{mean}");
            assert!((std_dev - 0.5).abs() < 0.01, "{std_dev}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn fitted_model_json_shape() {
    let m = fit_model(&dataset(vec![1.0, 2.0, 4.0]), ModelFamily::Lognormal).unwrap();
    let v = serde_json::to_value(m.record()).unwrap();
    assert_eq!(v["family"], "lognormal");
    assert!(v["parameters"]["mu"].is_f64());
    assert!(v["parameters"]["sigma"].is_f64());
    assert_eq!(v["n_observations"], 3);
}

fn standard_normal() -> FittedModel {
    FittedModel::from_family(Family::Gaussian {
        mean: 0.0,
        std_dev: 1.0,
    })
    .unwrap()
}

#[test]
fn classical_constant_is_exact() {
    let m = standard_normal();
    for q in [1, 7, 1000] {
        assert_eq!(classical_mc(&m, |_| 2.5, q, &mut seeded(q)).unwrap(), 2.5);
    }
}

#[test]
fn classical_clt_bound() {
    let m = standard_normal();
    let inside = (0..100u64)
        .into_par_iter()
        .filter(|&t| {
            classical_mc(&m, |x| x, 1_000_000, &mut seeded(derive_seed(3, &[t])))
                .unwrap()
                .abs()
                < 0.004
        })
        .count();
    assert!(inside >= 99, "{inside}/100");
}

fn classical_mse(q: u64, trials: u64, base: u64) -> f64 {
    let m = standard_normal();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            classical_mc(&m, |x| x, q, &mut seeded(derive_seed(base, &[q, t])))
                .unwrap()
                .powi(2)
        })
        .sum::<f64>()
        / trials as f64
}

#[test]
fn classical_mse_scales_inversely() {
    let ratio = classical_mse(1000, 200, 5) / classical_mse(4000, 200, 5);
    assert!(ratio > 4.0 / 1.5 && ratio < 4.0 * 1.5, "{ratio}");
}

#[test]
fn classical_is_unbiased() {
    let m = FittedModel::from_family(Family::LogNormal {
        mu: 0.0,
        sigma: 0.5,
    })
    .unwrap();
    let truth = (0.125f64).exp();
    let est: Vec<f64> = (0..1000u64)
        .into_par_iter()
        .map(|t| classical_mc(&m, |x| x, 100, &mut seeded(derive_seed(9, &[t]))).unwrap())
        .collect();
    let mean = est.iter().sum::<f64>() / 1000.0;
    let sd = (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 999.0).sqrt();
    assert!(
        (mean - truth).abs() < 4.0 * sd / 1000f64.sqrt(),
        "{mean} vs {truth}"
    );
}

#[test]
fn brute_force_oracles() {
    let d = explicit(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let one = normalize_function(&[1.0; 4], Some(0.0), Some(1.0)).unwrap();
    assert_eq!(brute_force_expectation(&d, &one).unwrap().normalized, 1.0);

    let u = explicit(vec![0.125; 8]).unwrap();
    let half = normalize_function(&[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0], None, None).unwrap();
    assert_eq!(brute_force_expectation(&u, &half).unwrap().normalized, 0.5);

    let mut rng = seeded(12);
    let w: Vec<f64> = (0..1024).map(|_| rng.random::<f64>()).collect();
    let z: f64 = w.iter().sum();
    let d = explicit(w.iter().map(|v| v / z).collect()).unwrap();
    let raw: Vec<f64> = (0..1024).map(|_| rng.random_range(-5.0..5.0)).collect();
    let f = normalize_function(&raw, None, None).unwrap();
    let mut naive = 0.0;
    for (p, v) in d.probs().iter().zip(f.normalized_values()) {
        naive += p * v;
    }
    assert!((brute_force_expectation(&d, &f).unwrap().normalized - naive).abs() < 1e-12);

    assert!(matches!(
        brute_force_expectation(&u, &one),
        Err(Error::Shape(_))
    ));
}

#[test]
fn fit_then_discretize_recovers_sample_mean() {
    let mut rng = seeded(21);
    let normal = Normal::new(1.5, 0.8).unwrap();
    let values: Vec<f64> = (0..5000).map(|_| normal.sample(&mut rng)).collect();
    let sample_mean = values.iter().sum::<f64>() / values.len() as f64;
    let model = fit_model(&dataset(values), ModelFamily::Gaussian).unwrap();
    let (lo, hi) = model.family.default_range().unwrap();
    let mut errors = Vec::new();
    for n in [4usize, 7, 10] {
        let d = discretize(&model.family, n, lo, hi).unwrap();
        let f =
            normalize_function(&Integrand::Identity.on_grid(&d.coordinates()), None, None).unwrap();
        errors.push((brute_force_expectation(&d, &f).unwrap().value - sample_mean).abs());
        if n == 10 {
            assert!(errors[2] < d.spacing(), "{errors:?}");
        }
    }
    assert!(errors[2] <= errors[0] + 1e-12, "{errors:?}");
}
