use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The four single-qubit Paulis `I, X, Y, Z`.
pub fn paulis() -> [DMatrix<Complex64>; 4] {
    let i = Complex64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(1.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ]
}

/// A completely positive trace-preserving map given by Kraus operators on one
/// or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    arity: usize,
    operators: Vec<DMatrix<Complex64>>,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

impl KrausChannel {
    /// Validates shapes and completeness `Σ K†K = I` within 1e-12.
    pub fn new(arity: usize, operators: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if !(1..=2).contains(&arity) {
            return Err(Error::InvalidCircuit(format!("channel arity {arity} not in {{1, 2}}")));
        }
        let d = 1usize << arity;
        if operators.is_empty() {
            return Err(Error::Empty("Kraus operator list"));
        }
        for k in &operators {
            if k.shape() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, got: k.nrows() });
            }
        }
        let ch = Self { arity, operators };
        let err = ch.completeness_error();
        if err > 1e-12 {
            return Err(Error::InvalidCircuit(format!("Kraus completeness violated by {err:e}")));
        }
        Ok(ch)
    }

    /// `{√(1−p) I, √(p/3) X, √(p/3) Y, √(p/3) Z}`.
    pub fn depolarizing_1q(p: f64) -> Result<Self> {
        check_probability(p)?;
        let [i, x, y, z] = paulis();
        let a = c((1.0 - p).sqrt());
        let b = c((p / 3.0).sqrt());
        Ok(Self { arity: 1, operators: vec![i * a, x * b, y * b, z * b] })
    }

    /// `{√(1−p) I⊗I} ∪ {√(p/15) P⊗Q : (P,Q) ≠ (I,I)}`, sixteen operators.
    pub fn depolarizing_2q(p: f64) -> Result<Self> {
        check_probability(p)?;
        let ps = paulis();
        let mut operators = Vec::with_capacity(16);
        for (a, pa) in ps.iter().enumerate() {
            for (b, pb) in ps.iter().enumerate() {
                let w = if a == 0 && b == 0 { 1.0 - p } else { p / 15.0 };
                operators.push(pa.kronecker(pb) * c(w.sqrt()));
            }
        }
        Ok(Self { arity: 2, operators })
    }

    /// `E0 = |0⟩⟨0| + √(1−p)|1⟩⟨1|`, `E1 = √p |0⟩⟨1|`.
    pub fn amplitude_damping(p: f64) -> Result<Self> {
        check_probability(p)?;
        let e0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt())]);
        let e1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(p.sqrt()), c(0.0), c(0.0)]);
        Ok(Self { arity: 1, operators: vec![e0, e1] })
    }

    /// `E0 = |0⟩⟨0| + √(1−p)|1⟩⟨1|`, `E1 = √p |1⟩⟨1|`.
    pub fn phase_damping(p: f64) -> Result<Self> {
        check_probability(p)?;
        let e0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt())]);
        let e1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(p.sqrt())]);
        Ok(Self { arity: 1, operators: vec![e0, e1] })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.operators
    }

    /// `max |Σ K†K − I|` entrywise.
    pub fn completeness_error(&self) -> f64 {
        let d = 1usize << self.arity;
        let sum = self
            .operators
            .iter()
            .fold(DMatrix::<Complex64>::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let diff = sum - DMatrix::identity(d, d);
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The channel whose operators are the adjoints `K†`. Applying it as a map
    /// gives the Heisenberg-picture dual `X ↦ Σ K† X K`.
    pub fn dual_operators(&self) -> Vec<DMatrix<Complex64>> {
        self.operators.iter().map(|k| k.adjoint()).collect()
    }
}
