use num_complex::Complex64;

use super::gate::{Gate, GateKind};
use super::local::{apply_local, qubit_mask};
use crate::error::{Error, Result};

/// Pure state of `n_qubits` qubits. Amplitude index bit `n-1-q` holds qubit `q`,
/// so qubit 0 is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes whose length is a power of two and whose norm is 1
    /// within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!("length {len} is not a power of two >= 2")));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm {norm} != 1")));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
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

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Tensor product `self ⊗ other`; `self` occupies the low-numbered qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { n_qubits: self.n_qubits + other.n_qubits, amps }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate.kind, gate.angle, &gate.targets);
        Ok(())
    }

    /// Functional form: returns `U|ψ⟩`.
    pub fn with_gate(mut self, gate: &Gate) -> Result<Self> {
        self.apply_gate(gate)?;
        Ok(self)
    }

    pub(crate) fn apply_unchecked(&mut self, kind: GateKind, angle: f64, targets: &[usize]) {
        match kind {
            GateKind::Rzz => {
                // diagonal: skip the dense kernel
                let ma = qubit_mask(self.n_qubits, targets[0]);
                let mb = qubit_mask(self.n_qubits, targets[1]);
                let same = Complex64::from_polar(1.0, -angle);
                let diff = Complex64::from_polar(1.0, angle);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    let parity = ((i & ma) != 0) ^ ((i & mb) != 0);
                    *a *= if parity { diff } else { same };
                }
            }
            _ => apply_local(&mut self.amps, self.n_qubits, targets, &kind.matrix(angle)),
        }
    }

    /// `⟨ψ|Z_q|ψ⟩`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits: self.n_qubits });
        }
        let m = qubit_mask(self.n_qubits, qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & m == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// Per-qubit `⟨Z_q⟩` for every qubit.
    pub fn z_expectations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_qubits];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, o) in out.iter_mut().enumerate() {
                if i & qubit_mask(self.n_qubits, q) == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_angle_rx_is_identity() {
        let psi = StateVector::normalized(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.0, 0.7),
            Complex64::new(0.4, 0.0),
        ])
        .unwrap();
        let out = psi.clone().with_gate(&Gate::rx(1, 0.0)).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn rx_pi_maps_zero_to_minus_i_one() {
        let out = StateVector::zero(1).with_gate(&Gate::rx(0, PI)).unwrap();
        assert!(close(out.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(out.amplitudes()[1], Complex64::new(0.0, -1.0)));
    }

    #[test]
    fn rzz_on_00_is_a_global_phase() {
        // direct exponential of diag(1,-1,-1,1): exp(-iθ) on |00⟩
        let theta = 0.83;
        let out = StateVector::zero(2).with_gate(&Gate::rzz(0, 1, theta)).unwrap();
        assert!(close(out.amplitudes()[0], Complex64::from_polar(1.0, -theta)));
        // |01⟩ picks up exp(+iθ)
        let out = StateVector::basis(2, 1).unwrap().with_gate(&Gate::rzz(0, 1, theta)).unwrap();
        assert!(close(out.amplitudes()[1], Complex64::from_polar(1.0, theta)));
    }

    #[test]
    fn rx_expectation_is_cosine() {
        for theta in [0.0, 0.4, 1.3, 2.9, 4.0] {
            let out = StateVector::zero(1).with_gate(&Gate::rx(0, theta)).unwrap();
            assert!((out.expectation_z(0).unwrap() - theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_expectations() {
        assert_eq!(StateVector::zero(1).expectation_z(0).unwrap(), 1.0);
        assert_eq!(StateVector::basis(1, 1).unwrap().expectation_z(0).unwrap(), -1.0);
        // |10⟩: qubit 0 is set
        let s = StateVector::basis(2, 2).unwrap();
        assert_eq!(s.z_expectations(), vec![-1.0, 1.0]);
        assert!(s.expectation_z(2).is_err());
    }

    #[test]
    fn gate_errors() {
        let mut s = StateVector::zero(2);
        assert!(matches!(s.apply_gate(&Gate::rx(2, 0.1)), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(s.apply_gate(&Gate::rzz(1, 1, 0.1)), Err(Error::DuplicateTargets(_))));
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]).is_err());
    }
}
