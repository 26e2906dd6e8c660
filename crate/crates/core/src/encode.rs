//! Discretized distributions and the state-preparation circuit that loads
//! them as amplitudes √p(x).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Circuit, Control, Gate, GateKind, QuantumState, MAX_QUBITS};

/// A parametric (or explicit) distribution family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Gaussian {
        mean: f64,
        std_dev: f64,
    },
    /// Parameters of the underlying normal in log space.
    #[serde(alias = "lognormal")]
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Constant density on `[low, high]`.
    Uniform {
        low: f64,
        high: f64,
    },
    /// Unnormalized weights, one per grid point.
    Explicit {
        weights: Vec<f64>,
    },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{what} must be finite, got {v}")))
            }
        };
        match *self {
            Family::Gaussian { mean, std_dev } => {
                finite(mean, "mean")?;
                finite(std_dev, "std_dev")?;
                if std_dev <= 0.0 {
                    return Err(Error::Domain(format!("std_dev must be > 0, got {std_dev}")));
                }
            }
            Family::LogNormal { mu, sigma } => {
                finite(mu, "mu")?;
                finite(sigma, "sigma")?;
                if sigma <= 0.0 {
                    return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
                }
            }
            Family::Uniform { low, high } => {
                finite(low, "low")?;
                finite(high, "high")?;
                if low >= high {
                    return Err(Error::Domain(format!(
                        "uniform needs low < high, got [{low}, {high}]"
                    )));
                }
            }
            Family::Explicit { ref weights } => {
                if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
                    return Err(Error::Domain(format!(
                        "explicit weight {w} is negative or not finite"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Density (up to normalization) at `x`.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Family::Gaussian { mean, std_dev } => {
                let z = (x - mean) / std_dev;
                (-0.5 * z * z).exp() / (std_dev * (2.0 * PI).sqrt())
            }
            Family::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu) / sigma;
                    (-0.5 * z * z).exp() / (x * sigma * (2.0 * PI).sqrt())
                }
            }
            Family::Uniform { low, high } => {
                if (low..=high).contains(&x) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Family::Explicit { .. } => f64::NAN,
        }
    }

    /// Default truncation range: μ ± 5σ (log-space equivalent for lognormal),
    /// the support for uniform. `None` for explicit weights.
    pub fn default_range(&self) -> Option<(f64, f64)> {
        match *self {
            Family::Gaussian { mean, std_dev } => {
                Some((mean - 5.0 * std_dev, mean + 5.0 * std_dev))
            }
            Family::LogNormal { mu, sigma } => {
                Some(((mu - 5.0 * sigma).exp(), (mu + 5.0 * sigma).exp()))
            }
            Family::Uniform { low, high } => Some((low, high)),
            Family::Explicit { .. } => None,
        }
    }
}

/// Probability vector over the 2ⁿ grid points plus the index→coordinate map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedDistribution {
    n_qubits: usize,
    x_lo: f64,
    x_hi: f64,
    probs: Vec<f64>,
    source: Family,
}

impl DiscretizedDistribution {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn len(&self) -> usize {
        self.probs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }
    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
    pub fn source(&self) -> &Family {
        &self.source
    }

    /// Grid spacing Δ = (x_hi − x_lo) / 2ⁿ.
    pub fn spacing(&self) -> f64 {
        (self.x_hi - self.x_lo) / self.probs.len() as f64
    }

    /// Physical coordinate of grid index `x` (cell midpoint).
    pub fn coordinate(&self, x: usize) -> f64 {
        self.x_lo + (x as f64 + 0.5) * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.probs.len()).map(|x| self.coordinate(x)).collect()
    }
}

/// Discretizes `family` onto 2^`n_qubits` midpoints of `[x_lo, x_hi]` and
/// renormalizes the truncated mass to one.
pub fn discretize(
    family: &Family,
    n_qubits: usize,
    x_lo: f64,
    x_hi: f64,
) -> Result<DiscretizedDistribution> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits is outside 1..={MAX_QUBITS}"
        )));
    }
    if !(x_lo.is_finite() && x_hi.is_finite()) || x_lo >= x_hi {
        return Err(Error::Domain(format!(
            "range needs finite x_lo < x_hi, got [{x_lo}, {x_hi}]"
        )));
    }
    family.validate()?;
    let size = 1usize << n_qubits;
    let delta = (x_hi - x_lo) / size as f64;
    let raw: Vec<f64> = match family {
        Family::Explicit { weights } => {
            if weights.len() != size {
                return Err(Error::Shape(format!(
                    "{} explicit weights for a {size}-point grid",
                    weights.len()
                )));
            }
            weights.clone()
        }
        f => (0..size)
            .map(|x| f.density(x_lo + (x as f64 + 0.5) * delta))
            .collect(),
    };
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Domain(format!(
            "distribution has no mass on [{x_lo}, {x_hi}] at {size} points"
        )));
    }
    Ok(DiscretizedDistribution {
        n_qubits,
        x_lo,
        x_hi,
        probs: raw.iter().map(|p| p / total).collect(),
        source: family.clone(),
    })
}

/// An explicit distribution from a probability vector on the unit-spaced grid [0, 2ⁿ).
pub fn explicit(probs: Vec<f64>) -> Result<DiscretizedDistribution> {
    let len = probs.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Shape(format!(
            "{len} probabilities is not a power of two >= 2"
        )));
    }
    let n = len.trailing_zeros() as usize;
    discretize(&Family::Explicit { weights: probs }, n, 0.0, len as f64)
}

/// A state-preparation circuit together with the distribution it loads.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePrepCircuit {
    pub circuit: Circuit,
    pub dist: DiscretizedDistribution,
}

/// Builds P with P|0…0⟩ = Σ_x √p(x)|x⟩ by binary bisection of probability mass.
///
/// Level `l` of the tree splits on qubit `n−1−l` (most significant first).
/// Each node holding mass `m` whose lower half holds `m_lo` becomes one Ry
/// of angle 2·arccos(√(m_lo/m)) on that qubit, controlled on the node's path
/// through the higher qubits. Nodes with zero mass or angle exactly 0 emit
/// no gate, so the gate count is at most 2ⁿ − 1.
pub fn synthesize_state_prep(dist: &DiscretizedDistribution) -> Result<StatePrepCircuit> {
    let n = dist.n_qubits;
    let probs = dist.probs();
    // prefix sums give the mass of any aligned block in O(1)
    let mut prefix = Vec::with_capacity(probs.len() + 1);
    prefix.push(0.0);
    for p in probs {
        prefix.push(prefix.last().unwrap() + p);
    }
    let mass = |start: usize, len: usize| (prefix[start + len] - prefix[start]).max(0.0);

    let mut circuit = Circuit::new(n);
    for level in 0..n {
        let target = n - 1 - level;
        let block = 1usize << (target + 1);
        for node in 0..(1usize << level) {
            let start = node * block;
            let total = mass(start, block);
            if total <= 0.0 {
                continue;
            }
            let lower = mass(start, block / 2);
            let ratio = (lower / total).clamp(0.0, 1.0);
            let angle = 2.0 * ratio.sqrt().acos();
            if angle == 0.0 {
                continue;
            }
            // path bits of this node are the bits of `start` above `target`
            let controls = (target + 1..n)
                .map(|q| Control {
                    qubit: q,
                    on_one: start >> q & 1 == 1,
                })
                .collect();
            circuit.push(Gate::new(GateKind::Ry(angle), vec![target], controls)?)?;
        }
    }
    Ok(StatePrepCircuit {
        circuit,
        dist: dist.clone(),
    })
}

/// Runs the circuit on |0…0⟩ and returns max_x |amplitude_x − √p(x)|.
pub fn verify_state_prep(sp: &StatePrepCircuit) -> Result<f64> {
    let state: QuantumState = sp.circuit.simulate()?;
    Ok(state
        .amplitudes()
        .iter()
        .zip(sp.dist.probs())
        .map(|(a, p)| (a - p.sqrt()).norm())
        .fold(0.0, f64::max))
}
