//! Kraus channels acting on a Bell pair: completeness, purity loss, and the
//! difference between depolarizing, amplitude and phase damping.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use qmsan::qcore::{DensityMatrix, KrausChannel, StateVector};

pub fn run_example() -> qmsan::Result<()> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let bell = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)])?;
    let rho = DensityMatrix::from_state(&bell);

    println!("{:<5} {:>5} {:>12} {:>8} {:>8}", "chan", "p", "|ΣK†K−I|", "purity", "⟨Z₁⟩");
    for p in [0.01, 0.1, 0.5, 1.0] {
        let channels = [
            ("D", KrausChannel::depolarizing_1q(p)?),
            ("AD", KrausChannel::amplitude_damping(p)?),
            ("PD", KrausChannel::phase_damping(p)?),
        ];
        for (name, ch) in channels {
            let mut out = rho.clone();
            out.apply_channel(&ch, &[1])?;
            println!(
                "{name:<5} {p:>5} {:>12.1e} {:>8.4} {:>8.4}",
                ch.completeness_error(),
                out.purity(),
                out.expectation_z(1)?
            );
        }
    }

    // two-qubit depolarizing, as inserted after each Rzz
    let mut out = rho.clone();
    out.apply_channel(&KrausChannel::depolarizing_2q(0.05)?, &[0, 1])?;
    println!("D2(0.05) on both qubits: purity {:.4}, trace {:.12}", out.purity(), out.trace().re);
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
