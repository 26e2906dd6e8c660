use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encode::StatePrepCircuit;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::sim::{Circuit, Gate, NoiseSpec, QuantumState};

/// A = R∘P on `n + 1` qubits; the good subspace is "appended qubit = 1".
#[derive(Debug, Clone)]
pub struct EstimationProblem {
    state_prep: StatePrepCircuit,
    oracle: Circuit,
    a: Circuit,
}

impl EstimationProblem {
    pub fn new(state_prep: StatePrepCircuit, oracle: Circuit) -> Result<Self> {
        let n = state_prep.circuit.n_qubits();
        if oracle.n_qubits() != n + 1 {
            return Err(Error::Shape(format!(
                "oracle acts on {} qubits, expected {} for a {n}-qubit state preparation",
                oracle.n_qubits(),
                n + 1
            )));
        }
        let mut a = Circuit::new(n + 1);
        a.append_mapped(&state_prep.circuit, &(0..n).collect::<Vec<_>>())?;
        a.append(&oracle)?;
        Ok(EstimationProblem {
            state_prep,
            oracle,
            a,
        })
    }

    pub fn n_input(&self) -> usize {
        self.state_prep.circuit.n_qubits()
    }

    /// Input qubits plus the appended qubit.
    pub fn n_qubits(&self) -> usize {
        self.n_input() + 1
    }

    pub fn good_qubit(&self) -> usize {
        self.n_input()
    }

    pub fn state_prep(&self) -> &StatePrepCircuit {
        &self.state_prep
    }

    pub fn oracle(&self) -> &Circuit {
        &self.oracle
    }

    /// A = R·(P ⊗ I).
    pub fn a_circuit(&self) -> &Circuit {
        &self.a
    }

    /// Exact a = P(appended = 1) for A|0⟩.
    pub fn true_amplitude(&self) -> Result<f64> {
        self.a.simulate()?.probability_one(self.good_qubit())
    }
}

/// Q = −A·S₀·A†·S_good. The explicit −1 makes the eigenphases ±2θ, which
/// matters once Q is controlled (phase estimation); P(good) is unaffected.
pub fn grover_operator(problem: &EstimationProblem) -> Result<Circuit> {
    let n = problem.n_qubits();
    let a = problem.a_circuit();
    let mut q = Circuit::new(n);
    q.push(Gate::z(problem.good_qubit()))?;
    q.append(&a.inverse())?;
    q.push(Gate::flip_about_zero((0..n).collect())?)?;
    q.append(a)?;
    q.push(Gate::global_phase(PI))?;
    Ok(q)
}

/// One schedule entry: `iterations` Grover iterates, measured `shots` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub iterations: u32,
    pub shots: u64,
}

impl ScheduleEntry {
    /// P-uses for a single shot: one A plus an A and an A† per iterate.
    pub fn calls_per_shot(&self) -> u64 {
        2 * u64::from(self.iterations) + 1
    }
}

/// Grover-iterate counts (strictly increasing) with their shot counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("schedule has no entries".into()));
        }
        if entries.iter().any(|e| e.shots == 0) {
            return Err(Error::Domain(
                "every schedule entry needs at least one shot".into(),
            ));
        }
        if entries
            .windows(2)
            .any(|w| w[0].iterations >= w[1].iterations)
        {
            return Err(Error::Domain(
                "schedule iteration counts must be strictly increasing".into(),
            ));
        }
        Ok(Schedule { entries })
    }

    /// m = 0, 1, 2, 4, …, 2^(depth−1), each with `shots` shots.
    pub fn exponential(depth: u32, shots: u64) -> Result<Self> {
        if depth > 30 {
            return Err(Error::Domain(format!(
                "schedule depth {depth} is too large"
            )));
        }
        let entries = std::iter::once(0)
            .chain((0..depth).map(|j| 1u32 << j))
            .map(|iterations| ScheduleEntry { iterations, shots })
            .collect();
        Schedule::new(entries)
    }

    /// Exponential schedule spending exactly `q` calls, with the depth whose
    /// per-entry shot count lands closest (in ratio) to `target_shots`.
    /// Calls left over after whole rounds become extra m = 0 shots.
    pub fn for_budget(q: u64, target_shots: u64, max_depth: u32) -> Result<Self> {
        if q == 0 || target_shots == 0 {
            return Err(Error::Plan(
                "budget and target shots must be positive".into(),
            ));
        }
        let target = target_shots as f64;
        let depth = (0..=max_depth.min(30))
            .filter(|&d| Schedule::calls_per_round(d) <= q)
            .min_by(|&a, &b| {
                let miss = |d: u32| {
                    ((q / Schedule::calls_per_round(d)) as f64 / target)
                        .ln()
                        .abs()
                };
                miss(a).total_cmp(&miss(b))
            })
            .expect("depth 0 costs one call");
        let cost = Schedule::calls_per_round(depth);
        let shots = q / cost;
        let mut entries = Schedule::exponential(depth, shots)?.entries;
        entries[0].shots += q - shots * cost;
        Schedule::new(entries)
    }

    /// q contributed by one shot at every entry: Σ (2m + 1).
    pub fn calls_per_round(depth: u32) -> u64 {
        1 + (0..depth).map(|j| 2 * (1u64 << j) + 1).sum::<u64>()
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn max_iterations(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.iterations)
    }

    /// q = Σ N_k (2m_k + 1).
    pub fn oracle_calls(&self) -> u64 {
        self.entries
            .iter()
            .map(|e| e.shots * e.calls_per_shot())
            .sum()
    }
}

/// Measured outcome of one schedule entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRecord {
    pub iterations: u32,
    pub shots: u64,
    pub hits: u64,
}

impl HitRecord {
    pub fn calls(&self) -> u64 {
        self.shots * (2 * u64::from(self.iterations) + 1)
    }
}

/// Hits per entry and the number of P-invocations that were simulated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleRun {
    pub records: Vec<HitRecord>,
    pub oracle_calls: u64,
}

/// Exact P(good) after m Grover iterates, computed by advancing one state
/// and cached per m.
#[derive(Debug, Clone)]
pub struct Amplifier {
    a: Circuit,
    q: Circuit,
    good: usize,
    state: QuantumState,
    at: u32,
    cache: BTreeMap<u32, f64>,
}

impl Amplifier {
    pub fn new(problem: &EstimationProblem) -> Result<Self> {
        let a = problem.a_circuit().clone();
        let state = a.simulate()?;
        Ok(Amplifier {
            q: grover_operator(problem)?,
            a,
            good: problem.good_qubit(),
            state,
            at: 0,
            cache: BTreeMap::new(),
        })
    }

    /// The state QᵐA|0⟩.
    pub fn state_after(&mut self, m: u32) -> Result<&QuantumState> {
        if m < self.at {
            self.state = self.a.simulate()?;
            self.at = 0;
        }
        while self.at < m {
            for g in self.q.gates() {
                self.state.apply(g)?;
            }
            self.at += 1;
        }
        Ok(&self.state)
    }

    pub fn probability(&mut self, m: u32) -> Result<f64> {
        if let Some(p) = self.cache.get(&m) {
            return Ok(*p);
        }
        let good = self.good;
        let p = self.state_after(m)?.probability_one(good)?;
        self.cache.insert(m, p);
        Ok(p)
    }
}

/// Runs every schedule entry and counts hits on the appended qubit.
///
/// Without noise the exact state QᵐA|0⟩ is simulated once per entry and the
/// shots are drawn binomially from it. With noise every shot is its own
/// stochastic Pauli trajectory; shots run in parallel from per-shot seeds
/// derived from one draw of `rng`, so results do not depend on scheduling.
pub fn run_schedule<R: Rng + ?Sized>(
    problem: &EstimationProblem,
    schedule: &Schedule,
    noise: Option<&NoiseSpec>,
    rng: &mut R,
) -> Result<ScheduleRun> {
    match noise {
        Some(n) if !n.is_noiseless() => run_noisy(problem, schedule, n, rng),
        _ => {
            let mut amp = Amplifier::new(problem)?;
            run_with_amplifier(&mut amp, schedule, rng)
        }
    }
}

/// Noiseless [`run_schedule`] reusing a caller-owned [`Amplifier`].
pub fn run_with_amplifier<R: Rng + ?Sized>(
    amp: &mut Amplifier,
    schedule: &Schedule,
    rng: &mut R,
) -> Result<ScheduleRun> {
    let probs = schedule
        .entries()
        .iter()
        .map(|e| amp.probability(e.iterations))
        .collect::<Result<Vec<_>>>()?;
    sample_schedule(schedule, &probs, rng)
}

/// Binomial hit counts for a schedule whose per-entry P(good) is known.
pub fn sample_schedule<R: Rng + ?Sized>(
    schedule: &Schedule,
    probabilities: &[f64],
    rng: &mut R,
) -> Result<ScheduleRun> {
    if probabilities.len() != schedule.entries().len() {
        return Err(Error::Shape(format!(
            "{} probabilities for {} schedule entries",
            probabilities.len(),
            schedule.entries().len()
        )));
    }
    let mut records = Vec::with_capacity(schedule.entries().len());
    let mut calls = 0u64;
    for (e, p) in schedule.entries().iter().zip(probabilities) {
        let p = p.clamp(0.0, 1.0);
        let hits = Binomial::new(e.shots, p)
            .map_err(|err| Error::Domain(format!("binomial draw failed: {err}")))?
            .sample(rng);
        calls += e.shots * e.calls_per_shot();
        records.push(HitRecord {
            iterations: e.iterations,
            shots: e.shots,
            hits,
        });
    }
    Ok(ScheduleRun {
        records,
        oracle_calls: calls,
    })
}

fn run_noisy<R: Rng + ?Sized>(
    problem: &EstimationProblem,
    schedule: &Schedule,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<ScheduleRun> {
    let a = problem.a_circuit();
    let q = grover_operator(problem)?;
    let good = problem.good_qubit();
    let base = rng.next_u64();
    let mut records = Vec::with_capacity(schedule.entries().len());
    let mut calls = 0u64;
    for (k, e) in schedule.entries().iter().enumerate() {
        let outcomes = (0..e.shots)
            .into_par_iter()
            .map(|shot| -> Result<(bool, u64)> {
                let mut r = seeded(derive_seed(base, &[k as u64, shot]));
                let mut state = QuantumState::new(a.n_qubits())?;
                a.run(&mut state, Some(noise), &mut r)?;
                let mut used = 1u64;
                for _ in 0..e.iterations {
                    q.run(&mut state, Some(noise), &mut r)?;
                    used += 2;
                }
                let p = state.probability_one(good)?;
                Ok((r.random::<f64>() < p, used))
            })
            .collect::<Result<Vec<_>>>()?;
        let hits = outcomes.iter().filter(|(h, _)| *h).count() as u64;
        calls += outcomes.iter().map(|(_, u)| u).sum::<u64>();
        records.push(HitRecord {
            iterations: e.iterations,
            shots: e.shots,
            hits,
        });
    }
    Ok(ScheduleRun {
        records,
        oracle_calls: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{explicit, synthesize_state_prep};
    use crate::oracle::{build_table_oracle, normalize_function};
    use crate::rng::seeded;

    /// Uniform p on 2 qubits and a constant integrand of value `a`.
    fn constant_problem(a: f64) -> EstimationProblem {
        let sp = synthesize_state_prep(&explicit(vec![0.25; 4]).unwrap()).unwrap();
        let f = normalize_function(&[a; 4], Some(0.0), Some(1.0)).unwrap();
        EstimationProblem::new(sp, build_table_oracle(&f, 2).unwrap()).unwrap()
    }

    #[test]
    fn budget_schedule_spends_exactly() {
        for q in [1u64, 7, 100, 1000, 12_345, 100_000] {
            let s = Schedule::for_budget(q, 24, 20).unwrap();
            assert_eq!(s.oracle_calls(), q);
        }
        let s = Schedule::for_budget(100_000, 24, 20).unwrap();
        let shots = s.entries()[1].shots;
        assert!((17..=34).contains(&shots), "{shots}");
        assert!(Schedule::for_budget(0, 24, 20).is_err());
    }

    #[test]
    fn oracle_width_is_checked() {
        let sp = synthesize_state_prep(&explicit(vec![0.25; 4]).unwrap()).unwrap();
        assert!(matches!(
            EstimationProblem::new(sp, Circuit::new(2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn closed_form_amplification() {
        let mut amp = Amplifier::new(&constant_problem(0.5)).unwrap();
        assert!((amp.probability(1).unwrap() - 0.5).abs() < 1e-12);

        let mut amp = Amplifier::new(&constant_problem(1.0)).unwrap();
        for m in 0..6 {
            assert!((amp.probability(m).unwrap() - 1.0).abs() < 1e-12);
        }

        // independent closed form: sin^2(3 asin(sqrt 0.3)) = 0.97200...
        let theta = 0.3f64.sqrt().asin();
        let expect = (3.0 * theta).sin().powi(2);
        assert!((expect - 0.972).abs() < 1e-3);
        let mut amp = Amplifier::new(&constant_problem(0.3)).unwrap();
        assert!((amp.probability(1).unwrap() - expect).abs() < 1e-9);
        // going backwards restarts from A|0>
        assert!((amp.probability(0).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation_and_accounting() {
        assert!(Schedule::new(vec![]).is_err());
        let bad = vec![
            ScheduleEntry {
                iterations: 2,
                shots: 1,
            },
            ScheduleEntry {
                iterations: 2,
                shots: 1,
            },
        ];
        assert!(Schedule::new(bad).is_err());
        assert!(Schedule::new(vec![ScheduleEntry {
            iterations: 0,
            shots: 0
        }])
        .is_err());

        let s = Schedule::exponential(3, 10).unwrap();
        let m: Vec<u32> = s.entries().iter().map(|e| e.iterations).collect();
        assert_eq!(m, vec![0, 1, 2, 4]);
        assert_eq!(s.oracle_calls(), 10 * (1 + 3 + 5 + 9));
        assert_eq!(Schedule::calls_per_round(3), 18);
    }

    #[test]
    fn extreme_amplitudes_give_extreme_hits() {
        let s = Schedule::exponential(4, 50).unwrap();
        let run = run_schedule(&constant_problem(1.0), &s, None, &mut seeded(1)).unwrap();
        assert!(run.records.iter().all(|r| r.hits == r.shots));
        let run = run_schedule(&constant_problem(0.0), &s, None, &mut seeded(1)).unwrap();
        assert!(run.records.iter().all(|r| r.hits == 0));
        assert_eq!(run.oracle_calls, s.oracle_calls());
    }

    #[test]
    fn seeded_runs_replay() {
        let s = Schedule::exponential(3, 40).unwrap();
        let p = constant_problem(0.3);
        let a = run_schedule(&p, &s, None, &mut seeded(9)).unwrap();
        let b = run_schedule(&p, &s, None, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
        let noise = NoiseSpec::depolarizing(0.05).unwrap();
        let a = run_schedule(&p, &s, Some(&noise), &mut seeded(9)).unwrap();
        let b = run_schedule(&p, &s, Some(&noise), &mut seeded(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.oracle_calls, s.oracle_calls());
    }
}
