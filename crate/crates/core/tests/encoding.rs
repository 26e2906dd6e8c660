use proptest::prelude::*;
use rand::Rng;

use qmci::encode::{discretize, explicit, synthesize_state_prep, verify_state_prep, Family};
use qmci::estimate::EstimationProblem;
use qmci::oracle::{build_table_oracle, normalize_function};
use qmci::rng::seeded;

fn random_weights(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
    // some exact zeros exercise the skipped-node path
    for _ in 0..len / 4 {
        let i = rng.random_range(0..len);
        w[i] = 0.0;
    }
    if w.iter().all(|&v| v == 0.0) {
        w[0] = 1.0;
    }
    w
}

#[test]
fn table_oracle_reproduces_weighted_sum() {
    let mut rng = seeded(2024);
    for case in 0..20 {
        let n = 1 + case % 6;
        let len = 1 << n;
        let w = random_weights(&mut rng, len);
        let total: f64 = w.iter().sum();
        let dist = explicit(w.iter().map(|v| v / total).collect()).unwrap();
        let raw: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..7.0)).collect();
        let f = normalize_function(&raw, None, None).unwrap();

        // independent oracle: a plain loop over the grid
        let mut expect = 0.0;
        for (p, v) in dist.probs().iter().zip(f.normalized_values()) {
            expect += p * v;
        }
        let problem = EstimationProblem::new(
            synthesize_state_prep(&dist).unwrap(),
            build_table_oracle(&f, n).unwrap(),
        )
        .unwrap();
        let got = problem.true_amplitude().unwrap();
        assert!(
            (got - expect).abs() < 1e-9,
            "case {case}: {got} vs {expect}"
        );
    }
}

#[test]
fn gaussian_midpoint_probabilities() {
    let d = discretize(
        &Family::Gaussian {
            mean: 0.0,
            std_dev: 1.0,
        },
        3,
        -4.0,
        4.0,
    )
    .unwrap();
    let mids = [-3.5f64, -2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 3.5];
    let dens: Vec<f64> = mids.iter().map(|x| (-x * x / 2.0).exp()).collect();
    let z: f64 = dens.iter().sum();
    for (p, d) in d.probs().iter().zip(&dens) {
        assert!((p - d / z).abs() < 1e-14);
    }
    let sp = synthesize_state_prep(&d).unwrap();
    assert!(verify_state_prep(&sp).unwrap() < 1e-12);
}

#[test]
fn state_prep_histogram_matches_distribution() {
    let d = discretize(
        &Family::LogNormal {
            mu: 0.0,
            sigma: 0.5,
        },
        4,
        0.1,
        4.0,
    )
    .unwrap();
    let sp = synthesize_state_prep(&d).unwrap();
    let hist = sp
        .circuit
        .simulate()
        .unwrap()
        .measure_all(20_000, &mut seeded(5))
        .unwrap();
    let tv: f64 = d
        .probs()
        .iter()
        .enumerate()
        .map(|(x, p)| (hist.count(x) as f64 / 20_000.0 - p).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "{tv}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prepared_amplitudes_are_root_probabilities(
        n in 1usize..7,
        seed in any::<u64>(),
    ) {
        let mut rng = seeded(seed);
        let w = random_weights(&mut rng, 1 << n);
        let total: f64 = w.iter().sum();
        let dist = explicit(w.iter().map(|v| v / total).collect()).unwrap();
        let sp = synthesize_state_prep(&dist).unwrap();
        prop_assert!(sp.circuit.len() < 1 << n);
        prop_assert!(verify_state_prep(&sp).unwrap() < 1e-10);
    }

    #[test]
    fn normalized_values_stay_in_unit_interval(raw in prop::collection::vec(-1e6f64..1e6, 1..64)) {
        let f = normalize_function(&raw, None, None).unwrap();
        for (&v, &r) in f.normalized_values().iter().zip(&raw) {
            prop_assert!((0.0..=1.0).contains(&v));
            if !f.is_constant() {
                let back = f.affine().denormalize(v);
                prop_assert!((back - r).abs() <= 1e-9 * (1.0 + r.abs()));
            }
        }
    }
}
