use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gate::{Gate, GateKind};
use crate::error::{Error, Result};

/// Depolarizing noise applied as stochastic Pauli trajectories: after every
/// physical gate, with probability `p_error`, one of X, Y, Z (uniformly) hits
/// one qubit of the register (uniformly).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    p_error: f64,
}

impl NoiseSpec {
    pub fn depolarizing(p_error: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_error) {
            return Err(Error::Domain(format!(
                "error probability {p_error} is outside [0, 1]"
            )));
        }
        Ok(NoiseSpec { p_error })
    }

    pub fn p_error(&self) -> f64 {
        self.p_error
    }

    pub fn is_noiseless(&self) -> bool {
        self.p_error == 0.0
    }

    /// Draws the error (if any) following one gate on an `n_qubits` register.
    pub fn sample<R: Rng + ?Sized>(&self, n_qubits: usize, rng: &mut R) -> Option<Gate> {
        if self.p_error == 0.0 || rng.random::<f64>() >= self.p_error {
            return None;
        }
        let qubit = rng.random_range(0..n_qubits);
        let kind = match rng.random_range(0..3u8) {
            0 => GateKind::X,
            1 => GateKind::Y,
            _ => GateKind::Z,
        };
        Some(Gate {
            kind,
            targets: vec![qubit],
            controls: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn probability_must_be_in_unit_interval() {
        assert!(NoiseSpec::depolarizing(-0.1).is_err());
        assert!(NoiseSpec::depolarizing(1.5).is_err());
        assert!(NoiseSpec::depolarizing(f64::NAN).is_err());
        assert!(NoiseSpec::depolarizing(0.0).unwrap().is_noiseless());
    }

    #[test]
    fn certain_error_always_fires() {
        let n = NoiseSpec::depolarizing(1.0).unwrap();
        let mut rng = seeded(3);
        for _ in 0..100 {
            let g = n.sample(4, &mut rng).unwrap();
            assert!(g.targets[0] < 4);
            assert!(matches!(g.kind, GateKind::X | GateKind::Y | GateKind::Z));
        }
    }

    #[test]
    fn error_rate_matches() {
        let n = NoiseSpec::depolarizing(0.2).unwrap();
        let mut rng = seeded(11);
        let hits = (0..20_000)
            .filter(|_| n.sample(3, &mut rng).is_some())
            .count();
        let frac = hits as f64 / 20_000.0;
        assert!((frac - 0.2).abs() < 0.015, "{frac}");
    }
}
