use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::local::check_targets;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Gate kinds understood by the simulator.
///
/// `Rx`, `Ry`, `Rz` and `Rzz` form the trainable gate set of the embedding
/// circuits. `Hadamard` and `ControlledSwap` only appear in the SWAP-test
/// subroutine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Rzz,
    Hadamard,
    ControlledSwap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Hadamard => 1,
            GateKind::Rzz => 2,
            GateKind::ControlledSwap => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "Rx",
            GateKind::Ry => "Ry",
            GateKind::Rz => "Rz",
            GateKind::Rzz => "Rzz",
            GateKind::Hadamard => "Hadamard",
            GateKind::ControlledSwap => "ControlledSwap",
        }
    }

    pub fn is_parametric(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rzz)
    }

    /// Row-major unitary. `angle` is ignored for fixed gates.
    ///
    /// Rotations follow `R_P(θ) = exp(-iθP/2)`; `Rzz(θ) = exp(-iθ Z⊗Z)` with
    /// no half-angle.
    pub fn matrix(self, angle: f64) -> Vec<Complex64> {
        match self {
            GateKind::Rx => {
                let (s, c) = (angle / 2.0).sin_cos();
                let ms = Complex64::new(0.0, -s);
                vec![Complex64::new(c, 0.0), ms, ms, Complex64::new(c, 0.0)]
            }
            GateKind::Ry => {
                let (s, c) = (angle / 2.0).sin_cos();
                vec![
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ]
            }
            GateKind::Rz => {
                let h = angle / 2.0;
                vec![Complex64::from_polar(1.0, -h), ZERO, ZERO, Complex64::from_polar(1.0, h)]
            }
            GateKind::Rzz => {
                let same = Complex64::from_polar(1.0, -angle);
                let diff = Complex64::from_polar(1.0, angle);
                let mut m = vec![ZERO; 16];
                m[0] = same;
                m[5] = diff;
                m[10] = diff;
                m[15] = same;
                m
            }
            GateKind::Hadamard => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                vec![h, h, h, -h]
            }
            GateKind::ControlledSwap => {
                let mut m = vec![ZERO; 64];
                for i in 0..8 {
                    // control is the local MSB; swap the two low bits when set
                    let j = if i & 4 != 0 {
                        4 | ((i & 1) << 1) | ((i >> 1) & 1)
                    } else {
                        i
                    };
                    m[j * 8 + i] = ONE;
                }
                m
            }
        }
    }

    /// Hermitian generator `H` with `U(θ) = exp(-iθH)`; `None` for fixed gates.
    pub fn generator(self) -> Option<Vec<Complex64>> {
        let half = Complex64::new(0.5, 0.0);
        match self {
            GateKind::Rx => Some(vec![ZERO, half, half, ZERO]),
            GateKind::Ry => Some(vec![ZERO, Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5), ZERO]),
            GateKind::Rz => Some(vec![half, ZERO, ZERO, -half]),
            GateKind::Rzz => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[5] = -ONE;
                m[10] = -ONE;
                m[15] = ONE;
                Some(m)
            }
            GateKind::Hadamard | GateKind::ControlledSwap => None,
        }
    }
}

/// A concrete gate: kind, bound angle (0 for fixed gates) and target qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub angle: f64,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn rx(qubit: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rx, angle, targets: vec![qubit] }
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        Self { kind: GateKind::Ry, angle, targets: vec![qubit] }
    }

    pub fn rz(qubit: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rz, angle, targets: vec![qubit] }
    }

    pub fn rzz(a: usize, b: usize, angle: f64) -> Self {
        Self { kind: GateKind::Rzz, angle, targets: vec![a, b] }
    }

    pub fn hadamard(qubit: usize) -> Self {
        Self { kind: GateKind::Hadamard, angle: 0.0, targets: vec![qubit] }
    }

    pub fn controlled_swap(control: usize, a: usize, b: usize) -> Self {
        Self { kind: GateKind::ControlledSwap, angle: 0.0, targets: vec![control, a, b] }
    }

    pub fn matrix(&self) -> Vec<Complex64> {
        self.kind.matrix(self.angle)
    }

    /// The inverse gate, `U†`.
    pub fn inverse(&self) -> Self {
        let angle = if self.kind.is_parametric() { -self.angle } else { self.angle };
        Self { angle, ..self.clone() }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        validate_targets(self.kind, &self.targets, n_qubits)
    }
}

pub(crate) fn validate_targets(kind: GateKind, targets: &[usize], n_qubits: usize) -> Result<()> {
    if targets.len() != kind.arity() {
        return Err(Error::GateArity {
            kind: kind.name(),
            expected: kind.arity(),
            got: targets.len(),
        });
    }
    check_targets(n_qubits, targets)
}
