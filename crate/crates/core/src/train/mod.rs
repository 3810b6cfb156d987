//! Forward pass, loss, gradients, Adam and the minibatch training loop.
//!
//! Gradients are exact reverse-mode derivatives through the simulation (see
//! [`crate::embed`] for the circuit part). Per-sample work runs on the rayon
//! pool; batch sums are always taken in batch order, so results do not depend
//! on the thread count.

mod config;
mod engine;
mod state;

pub use config::{Dataset, TrainConfig};
pub use state::{adam_step, ParamLayout, Segment, TrainState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attention::AttentionArtifacts;
use crate::error::{Error, Result};
use crate::noiselab::NoisePlan;
use crate::textdata::{truncate, Corpus, Sample, Vocab};
use engine::{Engine, TableScaler};

/// A configuration, its vocabulary and its parameters: everything needed to
/// make predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: TrainConfig,
    pub vocab: Vocab,
    pub state: TrainState,
}

impl Model {
    /// Fresh parameters for `vocab`, drawn from `ChaCha8(config.seed)`.
    pub fn init(config: TrainConfig, vocab: Vocab) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let state = TrainState::init(&config, vocab.len(), &mut rng)?;
        Ok(Self { config, vocab, state })
    }

    /// Circuit angles plus classifier weights and bias; word vectors excluded.
    pub fn param_count(&self) -> usize {
        self.state.layout().model_params()
    }

    /// Truncated token ids, with unknown tokens on the UNK row.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        self.state.table.ids(&self.vocab, truncate(tokens, self.config.sequence_length))
    }

    fn engine(&self, noise: &NoisePlan) -> Result<(Engine, TableScaler)> {
        Ok((Engine::new(&self.config, noise)?, TableScaler::fit(&self.state)?))
    }

    /// `ŷ` and the attention artifacts of one sentence, evaluated under
    /// `noise`.
    pub fn forward_with_noise(&self, tokens: &[String], noise: &NoisePlan) -> Result<(f64, AttentionArtifacts)> {
        let (engine, scaler) = self.engine(noise)?;
        let kept = truncate(tokens, self.config.sequence_length).to_vec();
        let pass = engine.forward(&self.state, &scaler, &self.encode(tokens), false)?;
        Ok((pass.y_hat, pass.artifacts(kept)))
    }

    /// Predictions for every sample under `noise`, in sample order.
    pub fn predict_all(&self, samples: &[Sample], noise: &NoisePlan) -> Result<Vec<f64>> {
        let (engine, scaler) = self.engine(noise)?;
        samples
            .par_iter()
            .map(|s| Ok(engine.forward(&self.state, &scaler, &self.encode(&s.tokens), false)?.y_hat))
            .collect()
    }
}

/// `ŷ` and attention artifacts for one sentence under the model's training
/// noise (none by default).
pub fn forward(tokens: &[String], model: &Model) -> Result<(f64, AttentionArtifacts)> {
    model.forward_with_noise(tokens, &model.config.noise)
}

/// `(1/2N) Σ (ŷ − y)²`.
pub fn mse_loss(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: predictions.len() });
    }
    if predictions.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    let n = predictions.len() as f64;
    Ok(predictions.iter().zip(labels).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / (2.0 * n))
}

/// Batch loss, flat gradient and per-sample predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub predictions: Vec<f64>,
}

/// Loss and its gradient over `batch` with respect to every trainable scalar,
/// under the model's training noise.
pub fn gradients(model: &Model, batch: &[Sample]) -> Result<BatchGradient> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let (engine, scaler) = model.engine(&model.config.noise)?;
    batch_gradient(model, &engine, &scaler, batch.iter().collect::<Vec<_>>().as_slice())
}

fn batch_gradient(model: &Model, engine: &Engine, scaler: &TableScaler, batch: &[&Sample]) -> Result<BatchGradient> {
    let total = model.state.layout().total();
    let per_sample: Vec<(f64, Vec<f64>)> = batch
        .par_iter()
        .map(|s| {
            let pass = engine.forward(&model.state, scaler, &model.encode(&s.tokens), true)?;
            let mut g = vec![0.0; total];
            engine.backward(&model.state, scaler, &pass, pass.y_hat - f64::from(s.label), &mut g);
            Ok((pass.y_hat, g))
        })
        .collect::<Result<_>>()?;

    let n = batch.len() as f64;
    let mut grad = vec![0.0; total];
    let mut predictions = Vec::with_capacity(batch.len());
    for (y_hat, g) in per_sample {
        for (acc, gi) in grad.iter_mut().zip(&g) {
            *acc += gi;
        }
        predictions.push(y_hat);
    }
    grad.iter_mut().for_each(|g| *g /= n);
    let labels: Vec<f64> = batch.iter().map(|s| f64::from(s.label)).collect();
    let loss = mse_loss(&predictions, &labels)?;
    Ok(BatchGradient { loss, grad, predictions })
}

/// `ŷ ≥ 0.5` counts as class 1.
pub fn classify(y_hat: f64) -> u8 {
    u8::from(y_hat >= 0.5)
}

fn accuracy(predictions: &[f64], samples: &[&Sample]) -> f64 {
    let correct = predictions.iter().zip(samples).filter(|(p, s)| classify(**p) == s.label).count();
    correct as f64 / samples.len().max(1) as f64
}

/// Fraction of correctly classified samples under the model's training noise.
pub fn evaluate(corpus: &Corpus, model: &Model) -> Result<f64> {
    evaluate_with_noise(corpus, model, &model.config.noise)
}

pub fn evaluate_with_noise(corpus: &Corpus, model: &Model, noise: &NoisePlan) -> Result<f64> {
    let preds = model.predict_all(&corpus.samples, noise)?;
    Ok(accuracy(&preds, &corpus.samples.iter().collect::<Vec<_>>()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iter: usize,
    pub loss: f64,
    /// Accuracy on this iteration's minibatch, before the update.
    pub train_acc: f64,
    /// Infinity norm of the batch gradient.
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: Vec<HistoryEntry>,
    pub converged: bool,
}

/// Minibatch Adam on `corpus` until the gradient infinity norm stays below
/// `conv_tol` for `conv_patience` consecutive iterations, or `max_iters`.
///
/// The vocabulary is built from the (truncated) training sentences. Batches
/// come from a per-epoch shuffle seeded by `config.seed`; the last partial
/// batch of an epoch is kept.
pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Empty("training corpus"));
    }
    let samples: Vec<Sample> = corpus
        .samples
        .iter()
        .map(|s| Sample { tokens: truncate(&s.tokens, config.sequence_length).to_vec(), label: s.label })
        .collect();
    let vocab = Vocab::from_samples(&samples);
    let mut model = Model::init(config.clone(), vocab)?;
    let engine = Engine::new(config, &config.noise)?;

    // the shuffle stream is separate from initialization so that changing
    // the batch size does not change the initial parameters
    let mut batches = Batcher::new(samples.len(), config.batch_size, config.seed ^ 0x5eed_5eed_5eed_5eed);
    let mut history = Vec::new();
    let mut streak = 0;
    let mut converged = false;

    for iter in 1..=config.max_iters {
        let batch: Vec<&Sample> = batches.next_batch().iter().map(|&i| &samples[i]).collect();

        let scaler = TableScaler::fit(&model.state)?;
        let bg = batch_gradient(&model, &engine, &scaler, &batch)?;
        if !bg.loss.is_finite() {
            return Err(Error::Diverged { iter, loss: bg.loss });
        }
        let grad_norm = bg.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        history.push(HistoryEntry { iter, loss: bg.loss, train_acc: accuracy(&bg.predictions, &batch), grad_norm });
        adam_step(&mut model.state, &bg.grad, config.learning_rate)?;

        if config.conv_tol.is_finite() {
            streak = if grad_norm < config.conv_tol { streak + 1 } else { 0 };
            if streak >= config.conv_patience.max(1) {
                converged = true;
                break;
            }
        }
    }
    Ok(TrainOutcome { model, history, converged })
}

/// Sample indices in shuffled epochs, cut into batches; the last batch of an
/// epoch may be short.
struct Batcher {
    order: Vec<usize>,
    cursor: usize,
    batch_size: usize,
    rng: ChaCha8Rng,
}

impl Batcher {
    fn new(n: usize, batch_size: usize, seed: u64) -> Self {
        Self { order: (0..n).collect(), cursor: n, batch_size, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn next_batch(&mut self) -> &[usize] {
        if self.cursor >= self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let start = self.cursor;
        self.cursor = (start + self.batch_size).min(self.order.len());
        &self.order[start..self.cursor]
    }
}

pub fn write_history(path: impl AsRef<Path>, history: &[HistoryEntry]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for h in history {
        serde_json::to_writer(&mut out, h)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Serialized model with optimizer state. Contains nothing time-dependent, so
/// identical runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config_hash: String,
    pub config: TrainConfig,
    pub seed: u64,
    pub vocab: Vec<String>,
    pub layout: ParamLayout,
    pub params: Vec<f64>,
    pub adam_m: Vec<f64>,
    pub adam_v: Vec<f64>,
    pub step: u64,
}

impl Checkpoint {
    pub fn from_model(model: &Model, config_hash: impl Into<String>) -> Self {
        Self {
            config_hash: config_hash.into(),
            config: model.config.clone(),
            seed: model.config.seed,
            vocab: model.vocab.tokens().to_vec(),
            layout: model.state.layout(),
            params: model.state.flatten(),
            adam_m: model.state.adam_m.clone(),
            adam_v: model.state.adam_v.clone(),
            step: model.state.step,
        }
    }

    pub fn to_model(&self) -> Result<Model> {
        let vocab = Vocab::from_tokens(self.vocab.clone());
        if vocab.len() != self.vocab.len() {
            return Err(Error::Layout("duplicate vocabulary entries".into()));
        }
        let mut model = Model::init(self.config.clone(), vocab)?;
        if model.state.layout() != self.layout {
            return Err(Error::Layout(format!(
                "checkpoint layout {:?} does not match its configuration {:?}",
                self.layout,
                model.state.layout()
            )));
        }
        model.state.assign(&self.params)?;
        if self.adam_m.len() != self.params.len() || self.adam_v.len() != self.params.len() {
            return Err(Error::Layout("Adam moments do not match the parameter vector".into()));
        }
        model.state.adam_m = self.adam_m.clone();
        model.state.adam_v = self.adam_v.clone();
        model.state.step = self.step;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}
