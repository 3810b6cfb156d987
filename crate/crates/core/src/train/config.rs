use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::attention::AttentionMode;
use crate::embed::EntanglerConfig;
use crate::error::{Error, Result};
use crate::noiselab::NoisePlan;

/// Datasets with published hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Mc,
    Rp,
    Imdb,
    Yelp,
    Amazon,
}

impl Dataset {
    pub const ALL: [Dataset; 5] = [Dataset::Mc, Dataset::Rp, Dataset::Imdb, Dataset::Yelp, Dataset::Amazon];

    /// `(n_qubits, layers, sequence_length)`.
    pub fn shape(self) -> (usize, usize, usize) {
        match self {
            Dataset::Mc => (2, 1, 4),
            Dataset::Rp => (4, 2, 4),
            Dataset::Imdb => (4, 1, 45),
            Dataset::Yelp => (4, 1, 32),
            Dataset::Amazon => (4, 1, 30),
        }
    }

    /// Adam learning rate for an entangler, with or without positional
    /// encoding. MC and RP were only run without it; the same rates are used.
    pub fn learning_rate(self, entangler: EntanglerConfig, positional: bool) -> f64 {
        use EntanglerConfig::*;
        let rates = match (self, positional) {
            (Dataset::Mc, _) => [0.005, 0.006, 0.009],
            (Dataset::Rp, _) => [0.002, 0.050, 0.010],
            (Dataset::Imdb, false) => [0.008, 0.008, 0.010],
            (Dataset::Imdb, true) => [0.008, 0.008, 0.008],
            (Dataset::Yelp, false) => [0.007, 0.007, 0.030],
            (Dataset::Yelp, true) => [0.030, 0.030, 0.010],
            (Dataset::Amazon, false) => [0.080, 0.009, 0.090],
            (Dataset::Amazon, true) => [0.020, 0.010, 0.020],
        };
        match entangler {
            Ring => rates[0],
            CircuitBlock => rates[1],
            AllToAll => rates[2],
        }
    }
}

/// Hyperparameters and model shape for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_iters: usize,
    /// Convergence threshold on the gradient infinity norm. `null` in JSON
    /// (infinite here) turns the check off so runs last `max_iters`.
    #[serde(with = "tolerance")]
    pub conv_tol: f64,
    pub conv_patience: usize,
    pub seed: u64,
    pub n_qubits: usize,
    pub layers: usize,
    pub entangler: EntanglerConfig,
    pub positional: bool,
    pub mode: AttentionMode,
    pub sequence_length: usize,
    /// Standard deviation of the normal initializer for angles, classifier
    /// weights and word vectors.
    pub init_sigma: f64,
    /// When false the word vectors stay at their random initial values.
    pub trainable_embeddings: bool,
    /// Noise applied to every embedding circuit during training.
    pub noise: NoisePlan,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::preset(Dataset::Mc, EntanglerConfig::Ring, false)
    }
}

impl TrainConfig {
    pub fn preset(dataset: Dataset, entangler: EntanglerConfig, positional: bool) -> Self {
        let (n_qubits, layers, sequence_length) = dataset.shape();
        Self {
            learning_rate: dataset.learning_rate(entangler, positional),
            batch_size: 64,
            max_iters: 1000,
            conv_tol: 1e-4,
            conv_patience: 10,
            seed: 0,
            n_qubits,
            layers,
            entangler,
            positional,
            mode: AttentionMode::MixedTrace,
            sequence_length,
            init_sigma: 0.1,
            trainable_embeddings: true,
            noise: NoisePlan::none(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.n_qubits < 2 {
            return bad(format!("n_qubits must be at least 2, got {}", self.n_qubits));
        }
        if self.n_qubits > 10 {
            return bad(format!("n_qubits {} is beyond dense simulation", self.n_qubits));
        }
        if self.sequence_length == 0 {
            return bad("sequence_length must be at least 1".into());
        }
        if self.conv_tol.is_nan() || self.conv_tol < 0.0 {
            return bad(format!("conv_tol must be non-negative, got {}", self.conv_tol));
        }
        if !(self.init_sigma > 0.0 && self.init_sigma.is_finite()) {
            return bad(format!("init_sigma must be positive, got {}", self.init_sigma));
        }
        self.mode.check(self.n_qubits)?;
        self.noise.validate()
    }
}

mod tolerance {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
