use nalgebra::DMatrix;
use num_complex::Complex64;

use super::channel::KrausChannel;
use super::gate::{Gate, GateKind};
use super::local::{check_targets, conjugate, qubit_mask, to_row_major};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Density matrix of `n_qubits` qubits, same bit ordering as [`StateVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (within 1e-10). Positivity is not
    /// checked here; see [`DensityMatrix::min_eigenvalue`].
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidState(format!("{}x{} is not a qubit density matrix", d, m.ncols())));
        }
        let rho = Self { n_qubits: d.trailing_zeros() as usize, m };
        let herm = rho.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian (max deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(n_qubits: usize, m: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(m.nrows(), 1 << n_qubits);
        Self { n_qubits, m }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_state(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        let m = DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj());
        Self { n_qubits: psi.n_qubits(), m }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let m = DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self { n_qubits, m }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        trace_of_product(&self.m, &self.m).re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, via a full Hermitian eigendecomposition. Meant for
    /// test and debug validation, not hot paths.
    pub fn min_eigenvalue(&self) -> f64 {
        self.m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate.kind, gate.angle, &gate.targets);
        Ok(())
    }

    /// Functional form: returns `UρU†`.
    pub fn with_gate(mut self, gate: &Gate) -> Result<Self> {
        self.apply_gate(gate)?;
        Ok(self)
    }

    pub(crate) fn apply_unchecked(&mut self, kind: GateKind, angle: f64, targets: &[usize]) {
        match kind {
            GateKind::Rzz => {
                let ma = qubit_mask(self.n_qubits, targets[0]);
                let mb = qubit_mask(self.n_qubits, targets[1]);
                let sign = |i: usize| if ((i & ma) != 0) ^ ((i & mb) != 0) { -1.0 } else { 1.0 };
                let d = self.dim();
                for j in 0..d {
                    for i in 0..d {
                        // phase exp(-iθ s_i) * exp(+iθ s_j)
                        let phase = angle * (sign(j) - sign(i));
                        self.m[(i, j)] *= Complex64::from_polar(1.0, phase);
                    }
                }
            }
            _ => conjugate(&mut self.m, self.n_qubits, targets, &kind.matrix(angle)),
        }
    }

    /// `Σ_i K_i ρ K_i†` on `targets`.
    pub fn apply_channel(&mut self, channel: &KrausChannel, targets: &[usize]) -> Result<()> {
        if targets.len() != channel.arity() {
            return Err(Error::GateArity {
                kind: "Kraus channel",
                expected: channel.arity(),
                got: targets.len(),
            });
        }
        check_targets(self.n_qubits, targets)?;
        self.apply_channel_unchecked(channel, targets);
        Ok(())
    }

    pub(crate) fn apply_channel_unchecked(&mut self, channel: &KrausChannel, targets: &[usize]) {
        let mut acc = DMatrix::zeros(self.dim(), self.dim());
        for k in channel.operators() {
            let mut term = self.m.clone();
            conjugate(&mut term, self.n_qubits, targets, &to_row_major(k));
            acc += term;
        }
        self.m = acc;
    }

    /// Reduced state on `keep` (kept qubits retain their relative order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidSubsystem("keep set is empty".into()));
        }
        check_targets(self.n_qubits, keep)?;
        if keep.len() == self.n_qubits {
            return Err(Error::InvalidSubsystem("keep set covers every qubit".into()));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        let traced: Vec<usize> = (0..self.n_qubits).filter(|q| !kept.contains(q)).collect();

        let spread = |local: usize, qubits: &[usize]| -> usize {
            let k = qubits.len();
            qubits
                .iter()
                .enumerate()
                .filter(|(j, _)| local & (1 << (k - 1 - j)) != 0)
                .fold(0, |acc, (_, &q)| acc | qubit_mask(self.n_qubits, q))
        };
        let dk = 1usize << kept.len();
        let dt = 1usize << traced.len();
        let kept_idx: Vec<usize> = (0..dk).map(|l| spread(l, &kept)).collect();
        let traced_idx: Vec<usize> = (0..dt).map(|l| spread(l, &traced)).collect();

        let m = DMatrix::from_fn(dk, dk, |i, j| {
            traced_idx
                .iter()
                .map(|&b| self.m[(kept_idx[i] | b, kept_idx[j] | b)])
                .sum()
        });
        Ok(DensityMatrix { n_qubits: kept.len(), m })
    }

    /// `tr(ρ Z_q)`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits: self.n_qubits });
        }
        let mask = qubit_mask(self.n_qubits, qubit);
        Ok((0..self.dim())
            .map(|i| if i & mask == 0 { self.m[(i, i)].re } else { -self.m[(i, i)].re })
            .sum())
    }

    pub fn z_expectations(&self) -> Vec<f64> {
        (0..self.n_qubits).map(|q| self.expectation_z(q).expect("in range")).collect()
    }

    /// `ρ ⊗ σ`; `self` occupies the low-numbered qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            m: self.m.kronecker(&other.m),
        }
    }
}

pub(crate) fn trace_of_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `tr(ρσ)`, the overlap of two states of equal dimension.
pub fn trace_overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let t = trace_of_product(&rho.m, &sigma.m);
    debug_assert!(t.im.abs() < 1e-9, "imaginary overlap {t}");
    Ok(t.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{haar_state as random_state, random_density};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn to_density_examples() {
        let rho = DensityMatrix::from_state(&StateVector::zero(1));
        assert_eq!(rho.matrix()[(0, 0)], c(1.0));
        assert_eq!(rho.matrix()[(1, 1)], c(0.0));

        let plus = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let rho = DensityMatrix::from_state(&plus);
        for v in rho.matrix().iter() {
            assert!((v - c(0.5)).norm() < 1e-15);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::from_state(&random_state(3, &mut rng));
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gate_conjugation() {
        let rho = DensityMatrix::from_state(&StateVector::zero(1));
        let out = rho.clone().with_gate(&Gate::rx(0, std::f64::consts::PI)).unwrap();
        assert!((out.matrix()[(1, 1)] - c(1.0)).norm() < 1e-12);
        assert!(out.matrix()[(0, 0)].norm() < 1e-12);
        let same = rho.clone().with_gate(&Gate::ry(0, 0.0)).unwrap();
        assert_eq!(same, rho);
    }

    #[test]
    fn rzz_on_density_matches_explicit_product() {
        // oracle: U ρ U† with U built as a dense 4x4 matrix
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_density(2, &mut rng);
        let u = DMatrix::from_row_slice(4, 4, &GateKind::Rzz.matrix(0.7));
        let expect = &u * rho.matrix() * u.adjoint();
        let got = rho.with_gate(&Gate::rzz(0, 1, 0.7)).unwrap();
        assert!((got.matrix() - &expect).norm() < 1e-12);
        assert!((got.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let bell = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
        let red = DensityMatrix::from_state(&bell).partial_trace(&[0]).unwrap();
        let half = DensityMatrix::maximally_mixed(1);
        assert!((red.matrix() - half.matrix()).norm() < 1e-15);
    }

    #[test]
    fn product_state_reduces_to_factor() {
        // |0⟩ ⊗ |+⟩, keep qubit 1
        let plus = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap();
        let psi = StateVector::zero(1).tensor(&plus);
        let red = DensityMatrix::from_state(&psi).partial_trace(&[1]).unwrap();
        let expect = DensityMatrix::from_state(&plus);
        assert!((red.matrix() - expect.matrix()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[0, 1]).is_err());
        assert!(rho.partial_trace(&[2]).is_err());
    }

    #[test]
    fn overlap_examples() {
        let zero = DensityMatrix::from_state(&StateVector::zero(1));
        let one = DensityMatrix::from_state(&StateVector::basis(1, 1).unwrap());
        assert!((trace_overlap(&zero, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(trace_overlap(&zero, &one).unwrap(), 0.0);
        assert!(trace_overlap(&zero, &DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn density_new_validates() {
        let bad = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.3), c(0.0), c(0.0)]);
        assert!(DensityMatrix::new(bad).is_err());
        let bad_trace = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(ok).is_ok());
    }

    #[test]
    fn random_densities_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let rho = random_density(n, &mut rng);
            assert!(rho.min_eigenvalue() >= -1e-8);
        }
    }
}
