use super::density::DensityMatrix;
use super::gate::Gate;
use crate::error::{Error, Result};

/// Probability that the ancilla of a SWAP-test circuit reads `|0⟩`.
///
/// Simulates the full `(2k+1)`-qubit circuit on `|0⟩⟨0| ⊗ ρ ⊗ σ`: Hadamard on
/// the ancilla (qubit 0), `k` controlled-SWAPs pairing qubit `1+i` with
/// `1+k+i`, a second Hadamard, then reads the ancilla population. Equals
/// `1/2 + tr(ρσ)/2`.
pub fn swap_test_probability(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != sigma.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let k = rho.n_qubits();
    let ancilla = DensityMatrix::from_state(&super::StateVector::zero(1));
    let mut joint = ancilla.tensor(rho).tensor(sigma);

    joint.apply_gate(&Gate::hadamard(0))?;
    for i in 0..k {
        joint.apply_gate(&Gate::controlled_swap(0, 1 + i, 1 + k + i))?;
    }
    joint.apply_gate(&Gate::hadamard(0))?;

    // ancilla bit clear: the lower half of the basis
    let half = joint.dim() / 2;
    Ok((0..half).map(|i| joint.matrix()[(i, i)].re).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{haar_state, random_density};
    use crate::qcore::{trace_overlap, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_pure_states_always_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::from_state(&haar_state(2, &mut rng));
        assert!((swap_test_probability(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_states_give_one_half() {
        let a = DensityMatrix::from_state(&StateVector::basis(2, 1).unwrap());
        let b = DensityMatrix::from_state(&StateVector::basis(2, 2).unwrap());
        assert!((swap_test_probability(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_states_follow_squared_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let psi = haar_state(1, &mut rng);
            let phi = haar_state(1, &mut rng);
            let ov = psi.inner(&phi).unwrap().norm_sqr();
            let p = swap_test_probability(&DensityMatrix::from_state(&psi), &DensityMatrix::from_state(&phi)).unwrap();
            assert!((p - (0.5 + ov / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_states_follow_trace_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(2, &mut rng);
        let p = swap_test_probability(&rho, &sigma).unwrap();
        let t = trace_overlap(&rho, &sigma).unwrap();
        assert!((p - 0.5 - t / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_sizes_fail() {
        let a = DensityMatrix::maximally_mixed(1);
        let b = DensityMatrix::maximally_mixed(2);
        assert!(swap_test_probability(&a, &b).is_err());
    }
}
