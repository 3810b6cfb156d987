//! Reduced states and global entanglement: partial traces of product, Bell
//! and random states next to their Meyer-Wallach values.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use qmsan::circmetrics::meyer_wallach_q;
use qmsan::qcore::random::haar_state;
use qmsan::qcore::{DensityMatrix, Gate, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(name: &str, psi: &StateVector) -> qmsan::Result<()> {
    let rho = DensityMatrix::from_state(psi);
    let purities: Vec<f64> = (0..psi.n_qubits()).map(|q| rho.partial_trace(&[q]).map(|r| r.purity())).collect::<Result<_, _>>()?;
    println!("{name:<14} Q = {:.4}  single-qubit purities {purities:.4?}", meyer_wallach_q(psi)?);
    Ok(())
}

pub fn run_example() -> qmsan::Result<()> {
    let c = |v: f64| Complex64::new(v, 0.0);
    report("|000⟩", &StateVector::zero(3))?;
    let plus = StateVector::zero(3).with_gate(&Gate::hadamard(0))?.with_gate(&Gate::hadamard(2))?;
    report("|+0+⟩", &plus)?;
    let bell = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)])?;
    report("Bell", &bell)?;
    let mut ghz = vec![c(0.0); 8];
    ghz[0] = c(FRAC_1_SQRT_2);
    ghz[7] = c(FRAC_1_SQRT_2);
    report("GHZ", &StateVector::from_amplitudes(ghz)?)?;
    report("Haar (4q)", &haar_state(4, &mut ChaCha8Rng::seed_from_u64(1)))?;

    // tr_B of a Bell pair is maximally mixed
    let reduced = DensityMatrix::from_state(&bell).partial_trace(&[0])?;
    println!("tr_B |Φ⁺⟩⟨Φ⁺| = {:.3}", reduced.matrix().map(|z| z.re));
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
