//! Random states for sampling and testing.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::density::DensityMatrix;
use super::state::StateVector;

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn haar_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> StateVector {
    let amps = (0..1usize << n_qubits).map(|_| complex_gaussian(rng)).collect();
    StateVector::normalized(amps).expect("gaussian vector is nonzero")
}

/// Full-rank random mixed state `GG†/tr(GG†)` with `G` a complex Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << n_qubits;
    let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let mut m = &g * g.adjoint();
    let tr = m.trace();
    m /= tr;
    // enforce exact Hermiticity against rounding
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::from_raw(n_qubits, m)
}

/// Random mixture of `rank` Haar states with Dirichlet-like weights.
pub fn random_mixture<R: Rng + ?Sized>(n_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let d = 1usize << n_qubits;
    let weights: Vec<f64> = (0..rank).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut m = DMatrix::zeros(d, d);
    for w in weights {
        let psi = haar_state(n_qubits, rng);
        m += DensityMatrix::from_state(&psi).into_matrix() * Complex64::new(w / total, 0.0);
    }
    DensityMatrix::from_raw(n_qubits, m)
}
