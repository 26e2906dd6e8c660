use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of target qubits a [`Unitary`] may act on.
pub const MAX_CUSTOM_TARGETS: usize = 3;

/// Dense unitary on up to [`MAX_CUSTOM_TARGETS`] qubits, row-major.
///
/// Row/column index bit `j` corresponds to the gate's `targets[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    n_targets: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    pub fn new(n_targets: usize, data: Vec<Complex64>) -> Result<Self> {
        if n_targets == 0 || n_targets > MAX_CUSTOM_TARGETS {
            return Err(Error::Shape(format!(
                "custom unitary must act on 1..={MAX_CUSTOM_TARGETS} qubits, got {n_targets}"
            )));
        }
        let dim = 1usize << n_targets;
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "custom unitary on {n_targets} qubits needs {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        let u = Unitary { n_targets, data };
        let dev = u.unitarity_defect();
        if dev > 1e-10 {
            return Err(Error::Domain(format!(
                "matrix is not unitary (max |U^dag U - I| = {dev:.3e})"
            )));
        }
        Ok(u)
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn dim(&self) -> usize {
        1 << self.n_targets
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn adjoint(&self) -> Unitary {
        let dim = self.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[c * dim + r] = self.get(r, c).conj();
            }
        }
        Unitary {
            n_targets: self.n_targets,
            data,
        }
    }

    /// max over entries of |U†U − I|.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += self.get(k, r).conj() * self.get(k, c);
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        worst
    }
}

/// The operation a [`Gate`] performs on its targets.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    T,
    /// T†.
    Tdg,
    /// exp(−iθY/2); maps |0⟩ to cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
    Ry(f64),
    /// exp(−iθZ/2).
    Rz(f64),
    /// diag(1, e^{iφ}).
    Phase(f64),
    /// Exchanges its two targets.
    Swap,
    /// Negates every amplitude whose target bits are all zero.
    PhaseFlipAboutZero,
    /// Multiplies by e^{iφ}. Acts on no targets; only observable when controlled.
    GlobalPhase(f64),
    Custom(Arc<Unitary>),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "phase",
            GateKind::Swap => "swap",
            GateKind::PhaseFlipAboutZero => "flip0",
            GateKind::GlobalPhase(_) => "gphase",
            GateKind::Custom(_) => "custom",
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, GateKind::Ry(_) | GateKind::Rz(_))
    }

    /// 2×2 matrix for single-target kinds, `[[m00, m01], [m10, m11]]`.
    pub fn single_qubit_matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        Some(match *self {
            GateKind::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            GateKind::X => [[z, one], [one, z]],
            GateKind::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            GateKind::Z => [[one, z], [z, -one]],
            GateKind::T => [[one, z], [z, Complex64::from_polar(1.0, FRAC_PI_4)]],
            GateKind::Tdg => [[one, z], [z, Complex64::from_polar(1.0, -FRAC_PI_4)]],
            GateKind::Ry(theta) => {
                let (s, co) = (theta / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            GateKind::Rz(theta) => [
                [Complex64::from_polar(1.0, -theta / 2.0), z],
                [z, Complex64::from_polar(1.0, theta / 2.0)],
            ],
            GateKind::Phase(phi) => [[one, z], [z, Complex64::from_polar(1.0, phi)]],
            _ => return None,
        })
    }

    pub fn inverse(&self) -> GateKind {
        match self {
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(p) => GateKind::Phase(-p),
            GateKind::GlobalPhase(p) => GateKind::GlobalPhase(-p),
            GateKind::Custom(u) => GateKind::Custom(Arc::new(u.adjoint())),
            other => other.clone(),
        }
    }

    fn expected_targets(&self) -> Option<usize> {
        match self {
            GateKind::Swap => Some(2),
            GateKind::PhaseFlipAboutZero => None,
            GateKind::GlobalPhase(_) => Some(0),
            GateKind::Custom(u) => Some(u.n_targets()),
            _ => Some(1),
        }
    }
}

/// A control qubit and the value it must hold for the gate to fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Control {
            qubit,
            on_one: true,
        }
    }

    pub fn zero(qubit: usize) -> Self {
        Control {
            qubit,
            on_one: false,
        }
    }
}

/// A gate application: kind, target qubits and (possibly negated) controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<Control>) -> Result<Self> {
        let gate = Gate {
            kind,
            targets,
            controls,
        };
        gate.check_structure()?;
        Ok(gate)
    }

    fn single(kind: GateKind, target: usize) -> Self {
        Gate {
            kind,
            targets: vec![target],
            controls: Vec::new(),
        }
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }
    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }
    pub fn y(q: usize) -> Self {
        Self::single(GateKind::Y, q)
    }
    pub fn z(q: usize) -> Self {
        Self::single(GateKind::Z, q)
    }
    pub fn t(q: usize) -> Self {
        Self::single(GateKind::T, q)
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Ry(theta), q)
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Rz(theta), q)
    }
    pub fn phase(q: usize, phi: f64) -> Self {
        Self::single(GateKind::Phase(phi), q)
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Gate::new(GateKind::X, vec![target], vec![Control::one(control)])
    }

    pub fn toffoli(c0: usize, c1: usize, target: usize) -> Result<Self> {
        Gate::new(
            GateKind::X,
            vec![target],
            vec![Control::one(c0), Control::one(c1)],
        )
    }

    pub fn controlled_ry(control: usize, target: usize, theta: f64) -> Result<Self> {
        Gate::new(
            GateKind::Ry(theta),
            vec![target],
            vec![Control::one(control)],
        )
    }

    pub fn controlled_phase(control: usize, target: usize, phi: f64) -> Result<Self> {
        Gate::new(
            GateKind::Phase(phi),
            vec![target],
            vec![Control::one(control)],
        )
    }

    pub fn swap(a: usize, b: usize) -> Result<Self> {
        Gate::new(GateKind::Swap, vec![a, b], Vec::new())
    }

    pub fn flip_about_zero(targets: Vec<usize>) -> Result<Self> {
        Gate::new(GateKind::PhaseFlipAboutZero, targets, Vec::new())
    }

    pub fn global_phase(phi: f64) -> Self {
        Gate {
            kind: GateKind::GlobalPhase(phi),
            targets: Vec::new(),
            controls: Vec::new(),
        }
    }

    pub fn custom(unitary: Unitary, targets: Vec<usize>) -> Result<Self> {
        Gate::new(GateKind::Custom(Arc::new(unitary)), targets, Vec::new())
    }

    /// Same gate with additional controls.
    pub fn with_controls(mut self, extra: &[Control]) -> Result<Self> {
        self.controls.extend_from_slice(extra);
        self.check_structure()?;
        Ok(self)
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// Every qubit the gate touches, targets first.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit))
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.qubits().max()
    }

    /// Checks target arity and that no qubit is used twice.
    fn check_structure(&self) -> Result<()> {
        match self.kind.expected_targets() {
            Some(k) if k != self.targets.len() => {
                return Err(Error::Shape(format!(
                    "{} gate takes {k} target(s), got {}",
                    self.kind.name(),
                    self.targets.len()
                )))
            }
            None if self.targets.is_empty() => {
                return Err(Error::Shape(format!(
                    "{} gate needs at least one target",
                    self.kind.name()
                )))
            }
            _ => {}
        }
        let mut seen: Vec<usize> = self.qubits().collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Shape(format!(
                "{} gate uses a qubit more than once (targets {:?}, controls {:?})",
                self.kind.name(),
                self.targets,
                self.controls.iter().map(|c| c.qubit).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    /// Validates the gate against a register of `n_qubits`.
    pub fn check_against(&self, n_qubits: usize) -> Result<()> {
        self.check_structure()?;
        if let Some(q) = self.max_qubit() {
            if q >= n_qubits {
                return Err(Error::Shape(format!(
                    "{} gate addresses qubit {q} on a {n_qubits}-qubit register",
                    self.kind.name()
                )));
            }
        }
        Ok(())
    }

    /// (mask, value) such that the gate fires on basis index `i` iff `i & mask == value`.
    #[inline]
    pub(crate) fn control_mask(&self) -> (usize, usize) {
        self.controls.iter().fold((0, 0), |(m, v), c| {
            let bit = 1usize << c.qubit;
            (m | bit, if c.on_one { v | bit } else { v })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defect(m: [[Complex64; 2]; 2]) -> f64 {
        let u = Unitary::new(1, vec![m[0][0], m[0][1], m[1][0], m[1][1]]);
        match u {
            Ok(u) => u.unitarity_defect(),
            Err(_) => f64::INFINITY,
        }
    }

    #[test]
    fn single_qubit_kinds_are_unitary() {
        let kinds = [
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::T,
            GateKind::Tdg,
            GateKind::Ry(0.731),
            GateKind::Rz(-2.2),
            GateKind::Phase(1.1),
        ];
        for k in kinds {
            let m = k.single_qubit_matrix().unwrap();
            assert!(defect(m) < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn rejects_non_unitary_custom() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert!(Unitary::new(1, vec![one, one, zero, one]).is_err());
        assert!(Unitary::new(1, vec![one, zero, zero]).is_err());
        assert!(Unitary::new(4, vec![one; 256]).is_err());
    }

    #[test]
    fn custom_adjoint_inverts() {
        let h = GateKind::H.single_qubit_matrix().unwrap();
        let t = GateKind::T.single_qubit_matrix().unwrap();
        // HT as a dense custom unitary
        let mut data = vec![Complex64::new(0.0, 0.0); 4];
        for r in 0..2 {
            for c in 0..2 {
                data[r * 2 + c] = h[r][0] * t[0][c] + h[r][1] * t[1][c];
            }
        }
        let u = Unitary::new(1, data).unwrap();
        let adj = u.adjoint();
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += adj.get(r, k) * u.get(k, c);
                }
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((acc - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn structure_checks() {
        assert!(Gate::cnot(1, 1).is_err());
        assert!(Gate::toffoli(0, 1, 0).is_err());
        assert!(Gate::new(GateKind::H, vec![0, 1], vec![]).is_err());
        assert!(Gate::new(GateKind::PhaseFlipAboutZero, vec![], vec![]).is_err());
        assert!(Gate::h(3).check_against(3).is_err());
        assert!(Gate::h(2).check_against(3).is_ok());
        let g = Gate::cnot(4, 0).unwrap();
        assert!(g.check_against(4).is_err());
    }

    #[test]
    fn control_mask_encodes_polarity() {
        let g = Gate::new(
            GateKind::X,
            vec![0],
            vec![Control::one(1), Control::zero(3)],
        )
        .unwrap();
        assert_eq!(g.control_mask(), (0b1010, 0b0010));
    }
}
