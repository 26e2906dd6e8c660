//! Amplitude estimation: Grover operator, schedules, likelihood fits,
//! phase estimation and a search demo.

mod canonical;
mod likelihood;
mod problem;
mod search;

pub use canonical::{
    amplitude_from_outcome, canonical_oracle_calls, canonical_qae, estimate_from_outcome,
    qae_outcome_distribution, MAX_EVAL_QUBITS,
};
pub use likelihood::{
    log_likelihood, mle_estimate, noise_aware_mle, noise_aware_mle_with, AmplitudeEstimate,
    FitFlags, NoiseAwareOptions, LR_DROP, MLE_GRID_POINTS,
};
pub use problem::{
    grover_operator, run_schedule, run_with_amplifier, sample_schedule, Amplifier,
    EstimationProblem, HitRecord, Schedule, ScheduleEntry, ScheduleRun,
};
pub use search::{
    grover_iterations, grover_search, search_angle, search_circuit, search_state,
    success_probability, MAX_SEARCH_QUBITS, MIN_SEARCH_QUBITS,
};
