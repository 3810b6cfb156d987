use std::f64::consts::FRAC_1_SQRT_2;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::qcore::DensityMatrix;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `Q = 2 (1 − mean_j tr ρ_j²)` from single-qubit reductions.
fn q_from_purities(psi: &StateVector) -> f64 {
    let rho = DensityMatrix::from_state(psi);
    let n = psi.n_qubits();
    let mean: f64 = (0..n).map(|j| rho.partial_trace(&[j]).unwrap().purity()).sum::<f64>() / n as f64;
    2.0 * (1.0 - mean)
}

fn random_product(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    (1..n).fold(haar_state(1, rng), |acc, _| acc.tensor(&haar_state(1, rng)))
}

#[test]
fn anchors() {
    assert_eq!(meyer_wallach_q(&StateVector::zero(2)).unwrap(), 0.0);
    let plus = StateVector::from_amplitudes(vec![c(0.5); 4]).unwrap();
    assert!(meyer_wallach_q(&plus).unwrap() < 1e-15);
    let bell = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
    assert!((meyer_wallach_q(&bell).unwrap() - 1.0).abs() < 1e-12);
    assert!(meyer_wallach_q(&StateVector::zero(1)).is_err());
}

#[test]
fn product_states_have_no_entanglement() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 2..=5 {
        for _ in 0..20 {
            assert!(meyer_wallach_q(&random_product(n, &mut rng)).unwrap() < 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn q_matches_reduced_purities(seed in any::<u64>(), n in 2usize..6) {
        let psi = haar_state(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let q = meyer_wallach_q(&psi).unwrap();
        prop_assert!((0.0..=1.0 + 1e-10).contains(&q));
        prop_assert!((q - q_from_purities(&psi)).abs() < 1e-10);
    }

    #[test]
    fn mmd_symmetric_and_zero_on_itself(seed in any::<u64>(), n in 1usize..12, sigma in 0.01f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect::<Vec<_>>();
        let (x, y) = (draw(), draw());
        prop_assert_eq!(mmd(&x, &y, sigma).unwrap(), mmd(&y, &x, sigma).unwrap());
        prop_assert!(mmd(&x, &x, sigma).unwrap() < 1e-12);
        prop_assert!(mmd(&x, &y, sigma).unwrap() >= 0.0);
    }
}

#[test]
fn mmd_examples() {
    let one = vec![vec![0.3, -1.0]];
    assert_eq!(mmd(&one, &one, 0.01).unwrap(), 0.0);
    // point masses far apart: self terms are 1, cross terms underflow to 0
    let x = vec![vec![0.0]; 5];
    let y = vec![vec![1.0]; 5];
    let n2 = 25.0;
    let expect = (n2 * 1.0 + n2 * 1.0 - 2.0 * n2 * (-1.0f64 / (2.0 * 0.01 * 0.01)).exp()) / n2;
    assert!((mmd(&x, &y, 0.01).unwrap() - expect).abs() < 1e-12);
    assert!((expect - 2.0).abs() < 1e-12);
    assert!(mmd(&[], &[], 0.01).is_err());
    assert!(mmd(&x, &y[..2], 0.01).is_err());
}

#[test]
fn canonical_vector_ignores_global_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi = haar_state(3, &mut rng);
    let phase = Complex64::from_polar(1.0, 2.1);
    let turned = StateVector::from_amplitudes(psi.amplitudes().iter().map(|a| a * phase).collect()).unwrap();
    let (a, b) = (canonical_vector(&psi), canonical_vector(&turned));
    assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
}

#[test]
fn no_entangling_layer_means_no_entanglement() {
    for cfg in EntanglerConfig::ALL {
        assert!(entangling_capability(cfg, 4, 0, 50, 1).unwrap() < 1e-10);
    }
}

#[test]
fn fixed_seed_reproduces() {
    let a = entangling_capability(EntanglerConfig::Ring, 3, 1, 40, 9).unwrap();
    assert_eq!(a, entangling_capability(EntanglerConfig::Ring, 3, 1, 40, 9).unwrap());
    assert_ne!(a, entangling_capability(EntanglerConfig::Ring, 3, 1, 40, 10).unwrap());
    let e = expressivity(EntanglerConfig::AllToAll, 3, 1, 40, 9).unwrap();
    assert_eq!(e, expressivity(EntanglerConfig::AllToAll, 3, 1, 40, 9).unwrap());
    assert!(e <= 1.0 + 1e-12);
}

#[test]
fn identity_circuit_is_less_expressive_than_a_deep_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let frozen = vec![StateVector::zero(3); 200];
    let deep = sample_outputs(&CircuitSpec::embedding(3, 4, EntanglerConfig::AllToAll, false).unwrap(), 200, true, &mut rng);
    for space in [SampleSpace::Fidelity, SampleSpace::Statevector] {
        let low = expressivity_of_states(&frozen, space, 0.01, &mut rng).unwrap();
        let high = expressivity_of_states(&deep, space, 0.01, &mut rng).unwrap();
        assert!(low < high, "{space:?}: {low} vs {high}");
    }
}

#[test]
fn statevector_space_saturates_at_small_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n_samples = 100;
    for cfg in [EntanglerConfig::Ring, EntanglerConfig::AllToAll] {
        let states = sample_outputs(&CircuitSpec::embedding(4, 1, cfg, false).unwrap(), n_samples, true, &mut rng);
        let e = expressivity_of_states(&states, SampleSpace::Statevector, 0.01, &mut rng).unwrap();
        assert!((1.0 - e - 2.0 / n_samples as f64).abs() < 1e-6);
    }
}

#[test]
fn box_stats_interpolate() {
    let s = BoxStats::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
    assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (1.0, 2.0, 3.0, 4.0, 5.0));
    let s = BoxStats::of(&[1.0, 2.0]).unwrap();
    assert_eq!((s.q1, s.median, s.q3), (1.25, 1.5, 1.75));
    assert!(s.contains(1.5) && !s.contains(1.9));
}

#[test]
fn run_table_shape_and_determinism() {
    let settings = MetricsConfig { n_qubits: 3, samples: 20, runs: 4, ..MetricsConfig::default() };
    let out = run_metrics(&settings).unwrap();
    assert_eq!(out.runs.len(), 12);
    assert_eq!(out.reports.len(), 3);
    let csv = metrics_csv(&out.runs);
    assert_eq!(csv.lines().count(), 13);
    assert_eq!(csv, metrics_csv(&run_metrics(&settings).unwrap().runs));

    // dropping a configuration leaves the others untouched
    let only_aa = MetricsConfig { configs: vec![EntanglerConfig::AllToAll], ..settings.clone() };
    assert_eq!(run_metrics(&only_aa).unwrap().runs[..], out.runs[8..]);

    assert!(MetricsConfig { n_qubits: 1, ..settings }.validate().is_err());
}
