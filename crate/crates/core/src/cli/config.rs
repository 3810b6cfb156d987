use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::circmetrics::MetricsConfig;
use crate::embed::EntanglerConfig;
use crate::error::{Error, Result};
use crate::noiselab::{NoisePlan, SweepMode};
use crate::textdata::{load_tsv, mc_fixture, Corpus, SplitScheme};
use crate::train::{Dataset, TrainConfig};

/// Where the sentences come from and how they are split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    /// Hyperparameter preset; training fields left out of the config take
    /// its values.
    pub preset: Dataset,
    /// TSV file, relative to the config file. Absent means the bundled MC
    /// fixture.
    pub path: Option<PathBuf>,
    pub split: SplitScheme,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self { preset: Dataset::Mc, path: None, split: SplitScheme::Holdout { test_fraction: 0.2 } }
    }
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Corpus> {
        match &self.path {
            Some(p) => load_tsv(p),
            None => Ok(mc_fixture()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub plans: Vec<NoisePlan>,
    pub mode: SweepMode,
}

/// A fully resolved experiment description.
///
/// Run `r` (of `runs`) uses seed `seed + r` for both its data split and its
/// initialization. With k-fold splitting every run trains once per fold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    pub train: TrainConfig,
    pub noise: NoiseSpec,
    pub runs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub metrics: MetricsConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    #[serde(default)]
    dataset: DatasetSpec,
    #[serde(default)]
    train: Map<String, Value>,
    #[serde(default)]
    noise: NoiseSpec,
    #[serde(default = "one")]
    runs: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_output")]
    output_dir: PathBuf,
    #[serde(default)]
    metrics: Option<Map<String, Value>>,
}

fn one() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn overlay<T: Serialize + for<'de> Deserialize<'de>>(base: &T, fields: &Map<String, Value>, section: &str) -> Result<T> {
    let mut value = serde_json::to_value(base)?;
    let obj = value.as_object_mut().expect("config sections are objects");
    for (k, v) in fields {
        obj.insert(k.clone(), v.clone());
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{section}: {e}")))
}

impl RunConfig {
    /// Parses a config document. Relative paths are taken against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawRunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if raw.train.contains_key("seed") {
            return Err(Error::Config("train.seed: set the top-level seed instead".into()));
        }
        // entangler and positional pick the preset learning rate, so read
        // them before laying the remaining fields over the preset
        let probe: TrainConfig = overlay(&TrainConfig::preset(raw.dataset.preset, EntanglerConfig::Ring, false), &raw.train, "train")?;
        let preset = TrainConfig::preset(raw.dataset.preset, probe.entangler, probe.positional);
        let mut train: TrainConfig = overlay(&preset, &raw.train, "train")?;
        train.seed = raw.seed;

        let metrics = match &raw.metrics {
            Some(fields) if fields.contains_key("seed") => {
                return Err(Error::Config("metrics.seed: set the top-level seed instead".into()))
            }
            Some(fields) => overlay(&MetricsConfig::default(), fields, "metrics")?,
            None => MetricsConfig::default(),
        };

        let mut dataset = raw.dataset;
        dataset.path = dataset.path.map(|p| if p.is_relative() { base_dir.join(p) } else { p });
        let output_dir = if raw.output_dir.is_relative() { base_dir.join(raw.output_dir) } else { raw.output_dir };

        let mut config = Self { dataset, train, noise: raw.noise, runs: raw.runs, seed: raw.seed, output_dir, metrics };
        config.set_seed(raw.seed);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
        self.metrics.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        match self.dataset.split {
            SplitScheme::Holdout { test_fraction } if !(test_fraction > 0.0 && test_fraction < 1.0) => {
                return Err(Error::Config(format!("test_fraction must lie in (0, 1), got {test_fraction}")))
            }
            SplitScheme::KFold { k } if k < 2 => return Err(Error::Config(format!("k-fold needs k ≥ 2, got {k}"))),
            _ => {}
        }
        self.train.validate()?;
        for plan in &self.noise.plans {
            plan.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the config serialized with sorted keys. The output
    /// directory is left out: it says where results go, not what they are.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        value.as_object_mut().expect("config is an object").remove("output_dir");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}
