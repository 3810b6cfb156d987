//! Per-sample forward and reverse passes of the full attention network.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{TrainConfig, TrainState};
use crate::attention::{reduce_pure, AttentionArtifacts, AttentionMode};
use crate::embed::{positional_angles, CircuitSpec, InputScaler, MixedTape, NoiseChannels, PositionalAngles};
use crate::error::{Error, Result};
use crate::noiselab::NoisePlan;
use crate::qcore::{trace_of_product, StateVector};

type CMatrix = DMatrix<Complex64>;

/// Input scaling fitted on the vocabulary rows of the word-vector table,
/// remembering which entries set the extrema.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TableScaler {
    pub scaler: InputScaler,
    argmin: (usize, usize),
    argmax: (usize, usize),
}

impl TableScaler {
    pub fn fit(state: &TrainState) -> Result<Self> {
        let rows = state.table.vocab_rows();
        let (mut argmin, mut argmax) = ((0, 0), (0, 0));
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v < lo {
                    lo = v;
                    argmin = (r, c);
                }
                if v > hi {
                    hi = v;
                    argmax = (r, c);
                }
            }
        }
        if !lo.is_finite() {
            return Err(Error::Empty("embedding table"));
        }
        Ok(Self { scaler: InputScaler::new(lo, hi)?, argmin, argmax })
    }
}

enum Run {
    Pure(StateVector),
    Mixed(MixedTape),
}

/// Everything from a forward pass that the reverse pass needs.
pub(crate) struct Pass {
    ids: Vec<usize>,
    xs: Vec<Vec<f64>>,
    runs: Vec<[Run; 3]>,
    ops_q: Vec<CMatrix>,
    ops_k: Vec<CMatrix>,
    pub values: Vec<Vec<f64>>,
    pub raw: Vec<Vec<f64>>,
    pub coeffs: Vec<Vec<f64>>,
    row_sums: Vec<f64>,
    pub outputs: Vec<Vec<f64>>,
    y_mean: Vec<f64>,
    pub y_hat: f64,
}

impl Pass {
    pub fn artifacts(&self, tokens: Vec<String>) -> AttentionArtifacts {
        AttentionArtifacts {
            tokens,
            raw_alpha: self.raw.clone(),
            coeffs: self.coeffs.clone(),
            values: self.values.clone(),
            outputs: self.outputs.clone(),
        }
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Circuit structure, positional angles and noise channels shared by every
/// sample of a run.
pub(crate) struct Engine {
    spec: CircuitSpec,
    positions: Vec<PositionalAngles>,
    noise: NoiseChannels,
    mode: AttentionMode,
    n: usize,
    trainable_embeddings: bool,
}

impl Engine {
    pub fn new(config: &TrainConfig, noise: &NoisePlan) -> Result<Self> {
        config.validate()?;
        let spec = CircuitSpec::embedding(config.n_qubits, config.layers, config.entangler, config.positional)?;
        let positions =
            if config.positional { positional_angles(config.sequence_length, config.n_qubits)? } else { Vec::new() };
        Ok(Self {
            spec,
            positions,
            noise: NoiseChannels::from_plan(noise)?,
            mode: config.mode,
            n: config.n_qubits,
            trainable_embeddings: config.trainable_embeddings,
        })
    }

    fn position(&self, s: usize) -> Option<&[f64]> {
        if self.spec.positional {
            Some(self.positions[s].0.as_slice())
        } else {
            None
        }
    }

    fn run(&self, x: &[f64], t: Option<&[f64]>, theta: &[f64], record: bool) -> Run {
        if self.noise.is_noiseless() {
            Run::Pure(self.spec.run_unchecked(x, t, theta))
        } else {
            Run::Mixed(self.spec.run_mixed_taped(x, t, theta, &self.noise, record))
        }
    }

    fn operand(&self, run: &Run) -> CMatrix {
        let keep = self.n / 2;
        match (run, self.mode) {
            (Run::Pure(psi), AttentionMode::MixedTrace) => reduce_pure(psi, keep),
            (Run::Pure(psi), AttentionMode::PureKernel) => {
                let v = DVector::from_column_slice(psi.amplitudes());
                &v * v.adjoint()
            }
            (Run::Mixed(tape), AttentionMode::MixedTrace) => {
                let keep: Vec<usize> = (0..keep).collect();
                tape.final_state().partial_trace(&keep).expect("valid split").into_matrix()
            }
            (Run::Mixed(tape), AttentionMode::PureKernel) => tape.final_matrix().clone(),
        }
    }

    fn value(run: &Run) -> Vec<f64> {
        match run {
            Run::Pure(psi) => psi.z_expectations(),
            Run::Mixed(tape) => tape.final_state().z_expectations(),
        }
    }

    /// Forward pass over token ids (already truncated). `record` keeps the
    /// intermediate density matrices needed for a noisy reverse pass.
    pub fn forward(&self, state: &TrainState, scaler: &TableScaler, ids: &[usize], record: bool) -> Result<Pass> {
        if ids.is_empty() {
            return Err(Error::Empty("sample"));
        }
        if self.spec.positional && ids.len() > self.positions.len() {
            return Err(Error::Config(format!("{} tokens exceed sequence_length {}", ids.len(), self.positions.len())));
        }
        let xs: Vec<Vec<f64>> = ids.iter().map(|&i| scaler.scaler.scale(&state.table.rows[i]).0).collect();
        let thetas = [&state.theta_q.theta, &state.theta_k.theta, &state.theta_v.theta];
        let runs: Vec<[Run; 3]> = xs
            .iter()
            .enumerate()
            .map(|(s, x)| thetas.map(|th| self.run(x, self.position(s), th, record)))
            .collect();
        let ops_q: Vec<CMatrix> = runs.iter().map(|r| self.operand(&r[0])).collect();
        let ops_k: Vec<CMatrix> = runs.iter().map(|r| self.operand(&r[1])).collect();
        let values: Vec<Vec<f64>> = runs.iter().map(|r| Self::value(&r[2])).collect();

        let raw: Vec<Vec<f64>> =
            ops_q.iter().map(|q| ops_k.iter().map(|k| trace_of_product(q, k).re).collect()).collect();
        let row_sums: Vec<f64> = raw.iter().map(|r| r.iter().sum()).collect();
        if let Some(row) = row_sums.iter().position(|&s| s <= 1e-15) {
            return Err(Error::DegenerateAttentionRow { row, sum: row_sums[row] });
        }
        let coeffs: Vec<Vec<f64>> = raw.iter().zip(&row_sums).map(|(r, s)| r.iter().map(|a| a / s).collect()).collect();
        let outputs = crate::attention::residual_outputs(&xs, &coeffs, &values)?;

        let s_len = ids.len() as f64;
        let mut y_mean = vec![0.0; self.n];
        for y in &outputs {
            for (m, v) in y_mean.iter_mut().zip(y) {
                *m += v / s_len;
            }
        }
        let z = state.w.iter().zip(&y_mean).map(|(w, y)| w * y).sum::<f64>() + state.b;
        Ok(Pass {
            ids: ids.to_vec(),
            xs,
            runs,
            ops_q,
            ops_k,
            values,
            raw,
            coeffs,
            row_sums,
            outputs,
            y_mean,
            y_hat: sigmoid(z),
        })
    }

    /// Adds `d_yhat · ∂ŷ/∂p` for every parameter `p` into `grad`
    /// ([`super::ParamLayout`] order).
    pub fn backward(&self, state: &TrainState, scaler: &TableScaler, pass: &Pass, d_yhat: f64, grad: &mut [f64]) {
        let n = self.n;
        let s_len = pass.ids.len();
        let p = state.theta_q.len();
        let (w_off, b_off, t_off) = (3 * p, 3 * p + n, 3 * p + n + 1);

        // classifier head
        let dz = d_yhat * pass.y_hat * (1.0 - pass.y_hat);
        for i in 0..n {
            grad[w_off + i] += dz * pass.y_mean[i];
        }
        grad[b_off] += dz;
        let dy: Vec<f64> = state.w.iter().map(|w| dz * w / s_len as f64).collect();

        // residual, normalization and values
        let mut dx = vec![dy.clone(); s_len];
        let mut dv = vec![vec![0.0; n]; s_len];
        let mut dalpha = vec![vec![0.0; s_len]; s_len];
        // every y_s has the same cotangent, so ∂L/∂C[s][j] = dy · v_j for all s
        let dc: Vec<f64> = pass.values.iter().map(|v| v.iter().zip(&dy).map(|(a, b)| a * b).sum()).collect();
        for s in 0..s_len {
            let dot: f64 = dc.iter().zip(&pass.coeffs[s]).map(|(a, b)| a * b).sum();
            for j in 0..s_len {
                dalpha[s][j] = (dc[j] - dot) / pass.row_sums[s];
                for i in 0..n {
                    dv[j][i] += pass.coeffs[s][j] * dy[i];
                }
            }
        }

        let dim_b = 1usize << (n - n / 2);
        let lift = |g: CMatrix| -> CMatrix {
            match self.mode {
                AttentionMode::MixedTrace => g.kronecker(&DMatrix::identity(dim_b, dim_b)),
                AttentionMode::PureKernel => g,
            }
        };
        let dim = 1usize << n;
        let z_diag = |dv: &[f64]| -> Vec<f64> {
            (0..dim)
                .map(|b| (0..n).map(|i| if (b >> (n - 1 - i)) & 1 == 0 { dv[i] } else { -dv[i] }).sum())
                .collect()
        };

        let thetas = [&state.theta_q.theta, &state.theta_k.theta, &state.theta_v.theta];
        for s in 0..s_len {
            let mut g_q = CMatrix::zeros(pass.ops_q[s].nrows(), pass.ops_q[s].ncols());
            let mut g_k = g_q.clone();
            for j in 0..s_len {
                g_q += &pass.ops_k[j] * Complex64::new(dalpha[s][j], 0.0);
                g_k += &pass.ops_q[j] * Complex64::new(dalpha[j][s], 0.0);
            }
            let g_v = z_diag(&dv[s]);
            let t = self.position(s);
            let x = &pass.xs[s];
            for (c, g) in [lift(g_q), lift(g_k)].into_iter().enumerate() {
                let seg = &mut grad[c * p..(c + 1) * p];
                match &pass.runs[s][c] {
                    Run::Pure(psi) => {
                        let lambda = &g * DVector::from_column_slice(psi.amplitudes());
                        self.spec.backprop_pure(x, t, thetas[c], psi, lambda.as_slice().to_vec(), seg, &mut dx[s]);
                    }
                    Run::Mixed(tape) => {
                        self.spec.backprop_mixed(x, t, thetas[c], &self.noise, tape, g, seg, &mut dx[s]);
                    }
                }
            }
            let seg = &mut grad[2 * p..3 * p];
            match &pass.runs[s][2] {
                Run::Pure(psi) => {
                    let lambda: Vec<Complex64> = psi.amplitudes().iter().zip(&g_v).map(|(a, g)| a * g).collect();
                    self.spec.backprop_pure(x, t, thetas[2], psi, lambda, seg, &mut dx[s]);
                }
                Run::Mixed(tape) => {
                    let g = CMatrix::from_diagonal(&DVector::from_iterator(dim, g_v.iter().map(|&v| Complex64::new(v, 0.0))));
                    self.spec.backprop_mixed(x, t, thetas[2], &self.noise, tape, g, seg, &mut dx[s]);
                }
            }
        }

        if !self.trainable_embeddings {
            return;
        }
        // input scaling, including the extrema's dependence on the table
        let width = state.table.width;
        let (mut dmin, mut dmax) = (0.0, 0.0);
        for (s, &id) in pass.ids.iter().enumerate() {
            for i in 0..n {
                let (dv, dlo, dhi) = scaler.scaler.backprop_value(state.table.rows[id][i], dx[s][i]);
                grad[t_off + id * width + i] += dv;
                dmin += dlo;
                dmax += dhi;
            }
        }
        grad[t_off + scaler.argmin.0 * width + scaler.argmin.1] += dmin;
        grad[t_off + scaler.argmax.0 * width + scaler.argmax.1] += dmax;
    }
}
