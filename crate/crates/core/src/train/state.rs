use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::embed::{embedding_param_count, EmbeddingParams};
use crate::error::{Error, Result};
use crate::textdata::EmbeddingTable;

/// A named slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Order of the flat parameter vector: query, key and value angles, classifier
/// weights, bias, then the word-vector table row by row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub segments: Vec<Segment>,
}

impl ParamLayout {
    pub fn new(per_circuit: usize, n_qubits: usize, table_rows: usize) -> Self {
        let sizes = [
            ("theta_q", per_circuit),
            ("theta_k", per_circuit),
            ("theta_v", per_circuit),
            ("w", n_qubits),
            ("b", 1),
            ("embedding", table_rows * n_qubits),
        ];
        let mut offset = 0;
        let segments = sizes
            .iter()
            .map(|&(name, len)| {
                let s = Segment { name: name.to_string(), offset, len };
                offset += len;
                s
            })
            .collect();
        Self { segments }
    }

    pub fn total(&self) -> usize {
        self.segments.last().map_or(0, |s| s.offset + s.len)
    }

    pub fn segment(&self, name: &str) -> Option<&Segment> {
        self.segments.iter().find(|s| s.name == name)
    }

    /// Parameters excluding the word vectors.
    pub fn model_params(&self) -> usize {
        self.segment("embedding").map_or(self.total(), |s| s.offset)
    }
}

/// Every trainable quantity plus Adam moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub theta_q: EmbeddingParams,
    pub theta_k: EmbeddingParams,
    pub theta_v: EmbeddingParams,
    pub table: EmbeddingTable,
    pub w: Vec<f64>,
    pub b: f64,
    pub adam_m: Vec<f64>,
    pub adam_v: Vec<f64>,
    pub step: u64,
}

impl TrainState {
    /// Draws angles, weights and word vectors (`vocab_len` rows plus UNK) from
    /// `N(0, init_sigma)`; `b = 0`.
    pub fn init(config: &TrainConfig, vocab_len: usize, rng: &mut impl Rng) -> Result<Self> {
        let normal = Normal::new(0.0, config.init_sigma).map_err(|e| Error::Config(format!("init_sigma: {e}")))?;
        let p = embedding_param_count(config.n_qubits, config.layers, config.entangler);
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| normal.sample(rng)).collect() };
        let theta_q = EmbeddingParams::new(draw(p));
        let theta_k = EmbeddingParams::new(draw(p));
        let theta_v = EmbeddingParams::new(draw(p));
        let w = draw(config.n_qubits);
        let table = EmbeddingTable::random(vocab_len, config.n_qubits, config.init_sigma, rng)?;
        let mut state = Self { theta_q, theta_k, theta_v, table, w, b: 0.0, adam_m: Vec::new(), adam_v: Vec::new(), step: 0 };
        let total = state.layout().total();
        state.adam_m = vec![0.0; total];
        state.adam_v = vec![0.0; total];
        Ok(state)
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(self.theta_q.len(), self.w.len(), self.table.rows.len())
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layout().total());
        out.extend_from_slice(&self.theta_q.theta);
        out.extend_from_slice(&self.theta_k.theta);
        out.extend_from_slice(&self.theta_v.theta);
        out.extend_from_slice(&self.w);
        out.push(self.b);
        for row in &self.table.rows {
            out.extend_from_slice(row);
        }
        out
    }

    /// Overwrites every parameter from a vector in [`ParamLayout`] order.
    pub fn assign(&mut self, flat: &[f64]) -> Result<()> {
        let layout = self.layout();
        if flat.len() != layout.total() {
            return Err(Error::Layout(format!("expected {} parameters, got {}", layout.total(), flat.len())));
        }
        let mut rest = flat;
        let mut take = |len: usize| {
            let (head, tail) = rest.split_at(len);
            rest = tail;
            head.to_vec()
        };
        let p = self.theta_q.len();
        self.theta_q.theta = take(p);
        self.theta_k.theta = take(p);
        self.theta_v.theta = take(p);
        self.w = take(self.w.len());
        self.b = take(1)[0];
        let width = self.table.width;
        for row in self.table.rows.iter_mut() {
            *row = take(width);
        }
        Ok(())
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// One Adam update with bias correction.
pub fn adam_step(state: &mut TrainState, grad: &[f64], lr: f64) -> Result<()> {
    let total = state.layout().total();
    if grad.len() != total || state.adam_m.len() != total || state.adam_v.len() != total {
        return Err(Error::Layout(format!(
            "gradient {} / moments {} / parameters {total}",
            grad.len(),
            state.adam_m.len()
        )));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient(i));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - ADAM_BETA1.powi(t);
    let c2 = 1.0 - ADAM_BETA2.powi(t);
    let mut params = state.flatten();
    for i in 0..total {
        let g = grad[i];
        let m = ADAM_BETA1 * state.adam_m[i] + (1.0 - ADAM_BETA1) * g;
        let v = ADAM_BETA2 * state.adam_v[i] + (1.0 - ADAM_BETA2) * g * g;
        state.adam_m[i] = m;
        state.adam_v[i] = v;
        params[i] -= lr * (m / c1) / ((v / c2).sqrt() + ADAM_EPS);
    }
    state.assign(&params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state() -> TrainState {
        TrainState::init(&TrainConfig::default(), 5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    #[test]
    fn layout_and_round_trip() {
        let mut s = state();
        let layout = s.layout();
        // MC ring: 3 × 6 angles, 2 weights, 1 bias, 6 × 2 word-vector entries
        assert_eq!(layout.model_params(), 15);
        assert_eq!(layout.total(), 15 + 12);
        assert_eq!(s.b, 0.0);
        let mut flat = s.flatten();
        flat[14] = 0.25;
        s.assign(&flat).unwrap();
        assert_eq!(s.b, 0.25);
        assert_eq!(s.flatten(), flat);
        assert!(s.assign(&flat[1..]).is_err());
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut s = state();
        let before = s.flatten();
        adam_step(&mut s, &vec![0.0; before.len()], 0.1).unwrap();
        assert_eq!(s.flatten(), before);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr_against_the_sign() {
        let mut s = state();
        let before = s.flatten();
        let grad: Vec<f64> = (0..before.len()).map(|i| if i % 2 == 0 { 0.3 } else { -2.0 }).collect();
        adam_step(&mut s, &grad, 0.01).unwrap();
        for ((a, b), g) in s.flatten().iter().zip(&before).zip(&grad) {
            // m̂ = g and v̂ = g², so Δ = -lr · g / (|g| + ε)
            let expect = -0.01 * g / (g.abs() + ADAM_EPS);
            assert!((a - b - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_gradient_steps_approach_lr() {
        let mut s = state();
        let grad = vec![0.7; s.layout().total()];
        let mut prev = s.flatten();
        for _ in 0..200 {
            adam_step(&mut s, &grad, 0.01).unwrap();
            let now = s.flatten();
            assert!(((prev[0] - now[0]) - 0.01).abs() < 1e-9);
            prev = now;
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut s = state();
        let mut grad = vec![0.0; s.layout().total()];
        grad[3] = f64::NAN;
        assert!(matches!(adam_step(&mut s, &grad, 0.1), Err(Error::NonFiniteGradient(3))));
    }
}
