//! Reverse-mode gradients of embedding circuits.
//!
//! Cotangents are Hermitian operators `G` with `df = tr(G dρ)` on the final
//! state. For a gate `exp(-iθH)` applied to state `ρ_k`, with `G_k` the
//! cotangent pulled back to just after that gate, `∂f/∂θ = Im tr(G_k [H, ρ_k])`.
//! The pure-state path is the same identity written with `λ = G_k |ψ_k⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{CircuitSpec, ParamBinding};
use crate::error::Result;
use crate::noiselab::NoisePlan;
use crate::qcore::{apply_local, conjugate, qubit_mask, to_row_major, DensityMatrix, GateKind, KrausChannel, StateVector};

type Op = Vec<Complex64>;

/// Row-major Kraus operators (and their adjoints) for the two placements of a
/// [`NoisePlan`].
#[derive(Debug, Clone, Default)]
pub struct NoiseChannels {
    single: Option<(Vec<Op>, Vec<Op>)>,
    two: Option<(Vec<Op>, Vec<Op>)>,
}

fn kraus_pair(ch: &KrausChannel) -> (Vec<Op>, Vec<Op>) {
    let fwd = ch.operators().iter().map(to_row_major).collect();
    let dual = ch.dual_operators().iter().map(to_row_major).collect();
    (fwd, dual)
}

impl NoiseChannels {
    pub fn from_plan(plan: &NoisePlan) -> Result<Self> {
        plan.validate()?;
        let single = match plan.single_qubit {
            Some(s) => Some(kraus_pair(&s.kind.channel(s.p)?)),
            None => None,
        };
        let two = match plan.two_qubit {
            Some(p) => Some(kraus_pair(&KrausChannel::depolarizing_2q(p)?)),
            None => None,
        };
        Ok(Self { single, two })
    }

    pub fn is_noiseless(&self) -> bool {
        self.single.is_none() && self.two.is_none()
    }
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Gate(usize),
    /// Two-qubit channel on the targets of op `usize`.
    Pair(usize),
    /// Single-qubit channel on a qubit.
    Single(usize),
}

/// Forward density-matrix run that optionally keeps every intermediate state.
#[derive(Debug, Clone)]
pub struct MixedTape {
    n_qubits: usize,
    steps: Vec<Step>,
    /// `states[k]` is the state after `steps[k]`; only the last entry when not
    /// recording.
    states: Vec<DMatrix<Complex64>>,
}

impl MixedTape {
    pub fn final_state(&self) -> DensityMatrix {
        DensityMatrix::from_raw(self.n_qubits, self.states.last().expect("nonempty tape").clone())
    }

    pub fn final_matrix(&self) -> &DMatrix<Complex64> {
        self.states.last().expect("nonempty tape")
    }

    /// Every recorded intermediate state.
    pub fn states(&self) -> impl Iterator<Item = DensityMatrix> + '_ {
        self.states.iter().map(|m| DensityMatrix::from_raw(self.n_qubits, m.clone()))
    }
}

fn apply_kraus(m: &DMatrix<Complex64>, n: usize, targets: &[usize], ops: &[Op]) -> DMatrix<Complex64> {
    let mut acc = DMatrix::zeros(m.nrows(), m.ncols());
    for k in ops {
        let mut term = m.clone();
        conjugate(&mut term, n, targets, k);
        acc += term;
    }
    acc
}

/// `H v` for the generator of `kind` on `targets`.
fn apply_generator(v: &mut [Complex64], n: usize, kind: GateKind, targets: &[usize]) {
    match kind {
        GateKind::Rzz => {
            let ma = qubit_mask(n, targets[0]);
            let mb = qubit_mask(n, targets[1]);
            for (i, a) in v.iter_mut().enumerate() {
                if ((i & ma) != 0) ^ ((i & mb) != 0) {
                    *a = -*a;
                }
            }
        }
        _ => apply_local(v, n, targets, &kind.generator().expect("parametric gate")),
    }
}

#[inline]
fn accumulate(binding: ParamBinding, g: f64, d_theta: &mut [f64], d_x: &mut [f64]) {
    match binding {
        ParamBinding::Data { slot } => d_x[slot] += g,
        ParamBinding::Trainable { index } => d_theta[index] += g,
        ParamBinding::Position { .. } => {}
    }
}

impl CircuitSpec {
    pub(crate) fn run_mixed_taped(
        &self,
        x: &[f64],
        t: Option<&[f64]>,
        theta: &[f64],
        noise: &NoiseChannels,
        record: bool,
    ) -> MixedTape {
        let n = self.n_qubits;
        let mut steps = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            steps.push(Step::Gate(i));
            if op.kind == GateKind::Rzz && noise.two.is_some() {
                steps.push(Step::Pair(i));
            }
        }
        if noise.single.is_some() {
            steps.extend((0..n).map(Step::Single));
        }

        let start = DensityMatrix::from_state(&StateVector::zero(n));
        let mut rho = DensityMatrix::into_matrix(start);
        let mut states = Vec::with_capacity(if record { steps.len() } else { 1 });
        for &step in &steps {
            match step {
                Step::Gate(i) => {
                    let op = &self.ops[i];
                    let mut d = DensityMatrix::from_raw(n, rho);
                    d.apply_unchecked(op.kind, Self::angle(op, x, t, theta), &op.targets);
                    rho = d.into_matrix();
                }
                Step::Pair(i) => {
                    let ops = &noise.two.as_ref().expect("two-qubit channel").0;
                    rho = apply_kraus(&rho, n, &self.ops[i].targets, ops);
                }
                Step::Single(q) => {
                    let ops = &noise.single.as_ref().expect("single-qubit channel").0;
                    rho = apply_kraus(&rho, n, &[q], ops);
                }
            }
            if record {
                states.push(rho.clone());
            }
        }
        if !record || states.is_empty() {
            states.push(rho);
        }
        MixedTape { n_qubits: n, steps, states }
    }

    /// Accumulates `∂f/∂θ` and `∂f/∂x'` for `f = tr(G ρ_final)` given a tape
    /// recorded with `record = true`.
    pub(crate) fn backprop_mixed(
        &self,
        x: &[f64],
        t: Option<&[f64]>,
        theta: &[f64],
        noise: &NoiseChannels,
        tape: &MixedTape,
        mut g: DMatrix<Complex64>,
        d_theta: &mut [f64],
        d_x: &mut [f64],
    ) {
        let n = self.n_qubits;
        assert_eq!(tape.states.len(), tape.steps.len(), "tape was not recorded");
        for (k, &step) in tape.steps.iter().enumerate().rev() {
            match step {
                Step::Gate(i) => {
                    let op = &self.ops[i];
                    if !matches!(op.binding, ParamBinding::Position { .. }) {
                        let mut b = tape.states[k].clone();
                        let d = b.nrows();
                        for col in b.as_mut_slice().chunks_mut(d) {
                            apply_generator(col, n, op.kind, &op.targets);
                        }
                        let comm = &b - b.adjoint();
                        let grad = crate::qcore::trace_of_product(&g, &comm).im;
                        accumulate(op.binding, grad, d_theta, d_x);
                    }
                    let angle = Self::angle(op, x, t, theta);
                    conjugate(&mut g, n, &op.targets, &op.kind.matrix(-angle));
                }
                Step::Pair(i) => {
                    let dual = &noise.two.as_ref().expect("two-qubit channel").1;
                    g = apply_kraus(&g, n, &self.ops[i].targets, dual);
                }
                Step::Single(q) => {
                    let dual = &noise.single.as_ref().expect("single-qubit channel").1;
                    g = apply_kraus(&g, n, &[q], dual);
                }
            }
        }
    }

    /// Pure-state counterpart of [`Self::backprop_mixed`]. `lambda` must be
    /// `G|ψ_final⟩`.
    pub(crate) fn backprop_pure(
        &self,
        x: &[f64],
        t: Option<&[f64]>,
        theta: &[f64],
        psi_final: &StateVector,
        lambda: Vec<Complex64>,
        d_theta: &mut [f64],
        d_x: &mut [f64],
    ) {
        let n = self.n_qubits;
        let mut psi = psi_final.clone();
        let mut lam = StateVector::from_raw(n, lambda);
        let mut h_psi = vec![Complex64::new(0.0, 0.0); psi.dim()];
        for op in self.ops.iter().rev() {
            if !matches!(op.binding, ParamBinding::Position { .. }) {
                h_psi.copy_from_slice(psi.amplitudes());
                apply_generator(&mut h_psi, n, op.kind, &op.targets);
                let overlap: Complex64 = lam.amplitudes().iter().zip(&h_psi).map(|(l, h)| l.conj() * h).sum();
                accumulate(op.binding, 2.0 * overlap.im, d_theta, d_x);
            }
            let angle = Self::angle(op, x, t, theta);
            psi.apply_unchecked(op.kind, -angle, &op.targets);
            lam.apply_unchecked(op.kind, -angle, &op.targets);
        }
    }
}
