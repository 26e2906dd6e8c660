//! Function encoding on an appended qubit.
//!
//! Both oracles act on `n + 1` qubits: the input register is qubits `0..n`
//! and the appended qubit is `n`. For an input Σ√p(x)|x⟩|0⟩ they produce
//! P(appended = 1) = Σ p(x)·g(x), where g is the normalized integrand for the
//! table oracle and sin²((ω·x + φ)/2) for a harmonic oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Circuit, Control, Gate, GateKind};

/// Integrand values on the grid with the affine map into [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedFunction {
    raw: Vec<f64>,
    f_min: f64,
    f_max: f64,
    normalized: Vec<f64>,
}

impl BoundedFunction {
    pub fn raw_values(&self) -> &[f64] {
        &self.raw
    }
    pub fn normalized_values(&self) -> &[f64] {
        &self.normalized
    }
    pub fn f_min(&self) -> f64 {
        self.f_min
    }
    pub fn f_max(&self) -> f64 {
        self.f_max
    }
    pub fn len(&self) -> usize {
        self.raw.len()
    }
    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// True when the bounds coincide; the normalized function is then 0.
    pub fn is_constant(&self) -> bool {
        self.f_max == self.f_min
    }

    pub fn affine(&self) -> AffineMap {
        AffineMap {
            f_min: self.f_min,
            f_max: self.f_max,
        }
    }
}

/// E[f] = f_min + (f_max − f_min)·E[f̃].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub f_min: f64,
    pub f_max: f64,
}

impl AffineMap {
    pub fn scale(&self) -> f64 {
        self.f_max - self.f_min
    }

    pub fn denormalize(&self, normalized: f64) -> f64 {
        if self.f_max == self.f_min {
            self.f_min
        } else {
            self.f_min + self.scale() * normalized
        }
    }
}

/// Normalizes `raw_values` into [0, 1]. Bounds default to the observed
/// extremes; explicit bounds must contain every value.
pub fn normalize_function(
    raw_values: &[f64],
    f_min: Option<f64>,
    f_max: Option<f64>,
) -> Result<BoundedFunction> {
    if raw_values.is_empty() {
        return Err(Error::Shape("integrand has no values".into()));
    }
    if let Some(v) = raw_values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("integrand value {v} is not finite")));
    }
    let lo = f_min.unwrap_or_else(|| raw_values.iter().copied().fold(f64::INFINITY, f64::min));
    let hi = f_max.unwrap_or_else(|| raw_values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Domain(format!("invalid bounds [{lo}, {hi}]")));
    }
    if let Some(v) = raw_values.iter().find(|&&v| v < lo || v > hi) {
        return Err(Error::Domain(format!(
            "value {v} lies outside bounds [{lo}, {hi}]"
        )));
    }
    let normalized = if hi == lo {
        vec![0.0; raw_values.len()]
    } else {
        let scale = hi - lo;
        raw_values
            .iter()
            .map(|v| ((v - lo) / scale).clamp(0.0, 1.0))
            .collect()
    };
    Ok(BoundedFunction {
        raw: raw_values.to_vec(),
        f_min: lo,
        f_max: hi,
        normalized,
    })
}

/// One multi-controlled Ry(2·arcsin√f̃(x)) per grid point, controlled on the
/// full input pattern x. 2ⁿ gates, so exponentially deep.
pub fn build_table_oracle(f: &BoundedFunction, n_qubits: usize) -> Result<Circuit> {
    let size = 1usize << n_qubits;
    if f.len() != size {
        return Err(Error::Shape(format!(
            "integrand has {} values for a {n_qubits}-qubit grid of {size}",
            f.len()
        )));
    }
    let mut c = Circuit::new(n_qubits + 1);
    for (x, v) in f.normalized_values().iter().enumerate() {
        let angle = 2.0 * v.sqrt().asin();
        let controls = (0..n_qubits)
            .map(|q| Control {
                qubit: q,
                on_one: x >> q & 1 == 1,
            })
            .collect();
        c.push(Gate::new(GateKind::Ry(angle), vec![n_qubits], controls)?)?;
    }
    Ok(c)
}

/// Angular frequency (radians per grid index) and phase of one harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpec {
    pub omega: f64,
    pub phase: f64,
}

/// Ry(phase) on the appended qubit followed by Ry(ω·2ʲ) controlled on each
/// input qubit j: n + 1 rotations whose angles add up to phase + ω·x.
pub fn build_harmonic_oracle(h: &HarmonicSpec, n_qubits: usize) -> Result<Circuit> {
    if !(h.omega.is_finite() && h.phase.is_finite()) {
        return Err(Error::Domain(format!("harmonic {h:?} is not finite")));
    }
    let mut c = Circuit::new(n_qubits + 1);
    c.push(Gate::ry(n_qubits, h.phase))?;
    for j in 0..n_qubits {
        c.push(Gate::controlled_ry(
            j,
            n_qubits,
            h.omega * (1u64 << j) as f64,
        )?)?;
    }
    Ok(c)
}

/// Built-in integrands, evaluated at physical grid coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Integrand {
    Identity,
    Square,
    /// max(x − threshold, 0).
    Relu {
        threshold: f64,
    },
    /// 1 on [lo, hi], 0 elsewhere.
    Indicator {
        lo: f64,
        hi: f64,
    },
    Constant {
        value: f64,
    },
}

impl Integrand {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Integrand::Identity => x,
            Integrand::Square => x * x,
            Integrand::Relu { threshold } => (x - threshold).max(0.0),
            Integrand::Indicator { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Integrand::Constant { value } => value,
        }
    }

    pub fn on_grid(&self, coords: &[f64]) -> Vec<f64> {
        coords.iter().map(|&x| self.eval(x)).collect()
    }
}
