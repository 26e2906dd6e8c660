use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::gate::{Gate, GateKind};
use crate::error::{Error, Result};

/// Largest register the simulator will allocate (2^26 amplitudes, 1 GiB).
pub const MAX_QUBITS: usize = 26;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A pure state of `n_qubits` qubits stored as 2ⁿ complex amplitudes.
///
/// Qubit 0 is the least-significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "register of {n_qubits} qubits is outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl QuantumState {
    /// |0…0⟩ on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { n_qubits, amps })
    }

    /// Computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::new(n_qubits)?;
        s.check_index(index)?;
        s.amps[0] = ZERO;
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps a caller-supplied amplitude vector. Its length must be a power of
    /// two and its norm must be 1 within 1e-9.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_capacity(n_qubits)?;
        let s = QuantumState { n_qubits, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("state norm is {norm}, expected 1")));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Result<Complex64> {
        self.check_index(index)?;
        Ok(self.amps[index])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.amps.len() {
            return Err(Error::Shape(format!(
                "basis index {index} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::Shape(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Born probability |amplitude|² of one basis state.
    pub fn probability_of(&self, index: usize) -> Result<f64> {
        self.check_index(index)?;
        Ok(self.amps[index].norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Marginal probability that `qubit` reads 1.
    pub fn probability_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Max-norm distance between amplitude vectors.
    pub fn max_distance(&self, other: &QuantumState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.check_against(self.n_qubits)?;
        let (mask, value) = gate.control_mask();
        match &gate.kind {
            GateKind::Swap => self.apply_swap(gate.targets[0], gate.targets[1], mask, value),
            GateKind::PhaseFlipAboutZero => {
                let tmask = gate.targets.iter().fold(0usize, |m, &q| m | (1 << q));
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & tmask == 0 && i & mask == value {
                        *a = -*a;
                    }
                }
            }
            GateKind::GlobalPhase(phi) => {
                let ph = Complex64::from_polar(1.0, *phi);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == value {
                        *a *= ph;
                    }
                }
            }
            GateKind::Custom(u) => {
                let dim = u.dim();
                let tmask = gate.targets.iter().fold(0usize, |m, &q| m | (1 << q));
                let offsets: Vec<usize> = (0..dim)
                    .map(|local| {
                        gate.targets
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| local >> j & 1 == 1)
                            .fold(0usize, |o, (_, &q)| o | (1 << q))
                    })
                    .collect();
                let mut buf = [ZERO; 8];
                for base in 0..self.amps.len() {
                    if base & tmask != 0 || base & mask != value {
                        continue;
                    }
                    for (slot, off) in buf.iter_mut().zip(&offsets) {
                        *slot = self.amps[base | off];
                    }
                    for (r, off) in offsets.iter().enumerate() {
                        let mut acc = ZERO;
                        for (c, v) in buf[..dim].iter().enumerate() {
                            acc += u.get(r, c) * v;
                        }
                        self.amps[base | off] = acc;
                    }
                }
            }
            kind => {
                let m = kind
                    .single_qubit_matrix()
                    .expect("remaining kinds are single-target");
                self.apply_single(gate.targets[0], m, mask, value);
            }
        }
        Ok(())
    }

    #[inline]
    fn apply_single(&mut self, target: usize, m: [[Complex64; 2]; 2], mask: usize, value: usize) {
        let bit = 1usize << target;
        let diagonal = m[0][1] == ZERO && m[1][0] == ZERO;
        let len = self.amps.len();
        let mut block = 0;
        while block < len {
            for i0 in block..block + bit {
                if i0 & mask != value {
                    continue;
                }
                let i1 = i0 | bit;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                if diagonal {
                    self.amps[i0] = m[0][0] * a0;
                    self.amps[i1] = m[1][1] * a1;
                } else {
                    self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                    self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
            block += 2 * bit;
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize, mask: usize, value: usize) {
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            // visit each pair once, from the member with bit a set and bit b clear
            if i & ba != 0 && i & bb == 0 && i & mask == value {
                let j = (i & !ba) | bb;
                self.amps.swap(i, j);
            }
        }
    }

    /// Samples `shots` full-register measurements by the Born rule.
    pub fn measure_all<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Histogram> {
        if shots == 0 {
            return Err(Error::Domain("shots must be at least 1".into()));
        }
        let probs = self.probabilities();
        let dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::Domain(format!("invalid Born distribution: {e}")))?;
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            *counts.entry(dist.sample(rng)).or_insert(0u64) += 1;
        }
        Ok(Histogram {
            n_qubits: self.n_qubits,
            counts,
        })
    }

    /// Measures one qubit, collapsing and renormalizing the state. Returns the bit.
    pub fn measure_one<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<u8> {
        let p1 = self.probability_one(qubit)?;
        let u: f64 = rng.random();
        let outcome = u8::from(u < p1);
        let keep_prob = if outcome == 1 { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep_prob.sqrt();
        let bit = 1usize << qubit;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit != 0) as u8) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        Ok(outcome)
    }

    /// Text dump, one line per basis index: `index bitstring re im prob`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i} {} {:.16e} {:.16e} {:.16e}",
                bitstring(i, self.n_qubits),
                a.re,
                a.im,
                a.norm_sqr()
            );
        }
        out
    }
}

/// Basis index rendered with qubit `n−1` leftmost.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Outcome counts of repeated full-register measurements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub n_qubits: usize,
    pub counts: BTreeMap<usize, u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    /// Count for a bitstring such as `"01"` (qubit n−1 leftmost).
    pub fn count_bits(&self, bits: &str) -> u64 {
        usize::from_str_radix(bits, 2)
            .map(|i| self.count(i))
            .unwrap_or(0)
    }

    pub fn by_bitstring(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .map(|(&i, &c)| (bitstring(i, self.n_qubits), c))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    fn bell() -> QuantumState {
        let mut s = QuantumState::new(2).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        s.apply(&Gate::cnot(0, 1).unwrap()).unwrap();
        s
    }

    #[test]
    fn new_state_is_ground() {
        let s = QuantumState::new(1).unwrap();
        assert_eq!(s.amplitudes(), &[Complex64::new(1.0, 0.0), ZERO]);
        let s = QuantumState::new(2).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(close(s.amplitudes()[0], 1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
    }

    #[test]
    fn capacity_bounds() {
        assert!(matches!(QuantumState::new(27), Err(Error::Capacity(_))));
        assert!(matches!(QuantumState::new(0), Err(Error::Capacity(_))));
    }

    #[test]
    fn hadamard_and_bell() {
        let mut s = QuantumState::new(1).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[1], FRAC_1_SQRT_2, 0.0));

        let b = bell();
        let a = b.amplitudes();
        assert!(close(a[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(a[1], 0.0, 0.0));
        assert!(close(a[2], 0.0, 0.0));
        assert!(close(a[3], FRAC_1_SQRT_2, 0.0));
        assert!((b.probability_of(0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(b.probability_of(1).unwrap(), 0.0);
        assert!(b.probability_of(4).is_err());
    }

    #[test]
    fn t_leaves_ground_unchanged() {
        let mut s = QuantumState::new(1).unwrap();
        s.apply(&Gate::t(0)).unwrap();
        assert_eq!(s, QuantumState::new(1).unwrap());
    }

    #[test]
    fn rejects_bad_indices() {
        let mut s = QuantumState::new(2).unwrap();
        assert!(matches!(s.apply(&Gate::h(2)), Err(Error::Shape(_))));
        assert!(s.probability_one(5).is_err());
    }

    #[test]
    fn measure_ground_is_deterministic() {
        let s = QuantumState::new(1).unwrap();
        let h = s.measure_all(100, &mut seeded(1)).unwrap();
        assert_eq!(h.count_bits("0"), 100);
        assert_eq!(h.total(), 100);
        assert!(s.measure_all(0, &mut seeded(1)).is_err());
    }

    #[test]
    fn bell_histogram_reproducible() {
        let b = bell();
        let h1 = b.measure_all(10_000, &mut seeded(42)).unwrap();
        let h2 = b.measure_all(10_000, &mut seeded(42)).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.count_bits("01") + h1.count_bits("10"), 0);
        let f00 = h1.count_bits("00") as f64 / 10_000.0;
        assert!((f00 - 0.5).abs() < 0.03);
    }

    #[test]
    fn measure_one_collapses() {
        let mut one = QuantumState::basis(1, 1).unwrap();
        for seed in 0..10 {
            let mut s = one.clone();
            assert_eq!(s.measure_one(0, &mut seeded(seed)).unwrap(), 1);
            assert_eq!(s, QuantumState::basis(1, 1).unwrap());
        }
        assert!(one.measure_one(1, &mut seeded(0)).is_err());

        // Bell: outcome 1 on qubit 0 leaves |11>
        let mut seen_one = false;
        for seed in 0..50 {
            let mut b = bell();
            if b.measure_one(0, &mut seeded(seed)).unwrap() == 1 {
                assert!(b.max_distance(&QuantumState::basis(2, 3).unwrap()) < 1e-12);
                seen_one = true;
            } else {
                assert!(b.max_distance(&QuantumState::basis(2, 0).unwrap()) < 1e-12);
            }
        }
        assert!(seen_one);
    }

    #[test]
    fn superposition_measures_evenly() {
        let mut ones = 0;
        let trials = 4000;
        for seed in 0..trials {
            let mut s = QuantumState::new(1).unwrap();
            s.apply(&Gate::h(0)).unwrap();
            ones += u64::from(s.measure_one(0, &mut seeded(seed)).unwrap());
        }
        let frac = ones as f64 / trials as f64;
        // 4 sigma of a fair coin over 4000 flips
        assert!((frac - 0.5).abs() < 4.0 * (0.25 / trials as f64).sqrt());
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(QuantumState::from_amplitudes(vec![ZERO; 3]).is_err());
        assert!(QuantumState::from_amplitudes(vec![ZERO; 4]).is_err());
        let s =
            QuantumState::from_amplitudes(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)])
                .unwrap();
        assert_eq!(s.n_qubits(), 1);
    }

    #[test]
    fn dump_format() {
        let d = bell().dump();
        let lines: Vec<&str> = d.lines().collect();
        assert_eq!(lines.len(), 4);
        let fields: Vec<&str> = lines[3].split(' ').collect();
        assert_eq!(fields[0], "3");
        assert_eq!(fields[1], "11");
        let prob: f64 = fields[4].parse().unwrap();
        assert!((prob - 0.5).abs() < 1e-15);
    }
}
