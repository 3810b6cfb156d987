//! Entangling capability (mean Meyer-Wallach Q) and MMD expressivity of the
//! embedding circuits.
//!
//! Circuits are sampled with trainable angles uniform in `[0, 2π)` and, by
//! default, data angles uniform in `[0, π]`. Expressivity compares the circuit
//! outputs with Haar-random states in one of two sample spaces:
//!
//! * [`SampleSpace::Fidelity`] (default): pairwise fidelities `|⟨ψ|φ⟩|²` of
//!   independent outputs against the same statistic for Haar pairs.
//! * [`SampleSpace::Statevector`]: the states themselves as real vectors
//!   `(Re ψ, Im ψ)` after fixing the global phase. With `σ = 0.01` distinct
//!   states are numerically orthogonal under the kernel, so this space gives
//!   `MMD ≈ 2/N` for every circuit and cannot rank configurations.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{CircuitSpec, EntanglerConfig};
use crate::error::{Error, Result};
use crate::qcore::random::haar_state;
use crate::qcore::StateVector;

/// Meyer-Wallach global entanglement `Q ∈ [0, 1]`.
pub fn meyer_wallach_q(state: &StateVector) -> Result<f64> {
    let n = state.n_qubits();
    if n < 2 {
        return Err(Error::InvalidCircuit(format!("Meyer-Wallach Q needs at least 2 qubits, got {n}")));
    }
    let amps = state.amplitudes();
    let mut total = 0.0;
    for j in 0..n {
        let mask = 1usize << (n - 1 - j);
        let (u, v): (Vec<Complex64>, Vec<Complex64>) = (0..amps.len())
            .filter(|i| i & mask == 0)
            .map(|i| (amps[i], amps[i | mask]))
            .unzip();
        total += wedge_distance(&u, &v);
    }
    Ok((4.0 / n as f64 * total).clamp(0.0, 1.0))
}

/// `½ Σ_{i,k} |u_i v_k − u_k v_i|²`; the summand is symmetric and vanishes on
/// the diagonal, so only `i < k` is visited.
fn wedge_distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    let mut d = 0.0;
    for i in 0..u.len() {
        for k in i + 1..u.len() {
            d += (u[i] * v[k] - u[k] * v[i]).norm_sqr();
        }
    }
    d
}

/// `k(x, y) = exp(−|x − y|² / 2σ²)`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], sigma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Biased MMD estimate `(1/N²) |Σ_{i,j} k(X_i,X_j) + k(Y_i,Y_j) − 2k(X_i,Y_j)|`.
pub fn mmd(x: &[Vec<f64>], y: &[Vec<f64>], sigma: f64) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("MMD samples"));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("kernel width must be positive, got {sigma}")));
    }
    let block = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        a.iter().map(|p| b.iter().map(|q| gaussian_kernel(p, q, sigma)).sum::<f64>()).sum()
    };
    let n2 = (x.len() * x.len()) as f64;
    // both cross sums are taken (they agree up to rounding) and each pair is
    // added before subtracting, which keeps mmd(X, Y) == mmd(Y, X) bit for bit
    let own = block(x, x) + block(y, y);
    let cross = block(x, y) + block(y, x);
    Ok((own - cross).abs() / n2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSpace {
    #[default]
    Fidelity,
    Statevector,
}

/// Real vector `(Re ψ, Im ψ)` with the largest-magnitude amplitude rotated to
/// the non-negative real axis.
pub fn canonical_vector(state: &StateVector) -> Vec<f64> {
    let amps = state.amplitudes();
    let pivot = amps.iter().enumerate().fold(0, |best, (i, a)| if a.norm() > amps[best].norm() { i } else { best });
    let phase = if amps[pivot].norm() > 0.0 { amps[pivot].conj() / amps[pivot].norm() } else { Complex64::new(1.0, 0.0) };
    let rotated: Vec<Complex64> = amps.iter().map(|a| a * phase).collect();
    rotated.iter().map(|a| a.re).chain(rotated.iter().map(|a| a.im)).collect()
}

fn fidelities(states: &[StateVector]) -> Vec<Vec<f64>> {
    let half = states.len() / 2;
    (0..half).map(|i| vec![states[i].inner(&states[half + i]).expect("same width").norm_sqr()]).collect()
}

/// `1 − MMD` between `outputs` and Haar-random states drawn from `rng`.
///
/// The fidelity space pairs output `i` with output `i + N/2`, so `N/2` values
/// enter the estimate; the statevector space uses all `N`.
pub fn expressivity_of_states(outputs: &[StateVector], space: SampleSpace, sigma: f64, rng: &mut impl Rng) -> Result<f64> {
    let Some(first) = outputs.first() else { return Err(Error::Empty("circuit samples")) };
    let n = first.n_qubits();
    let reference: Vec<StateVector> = (0..outputs.len()).map(|_| haar_state(n, rng)).collect();
    let (x, y) = match space {
        SampleSpace::Fidelity => {
            if outputs.len() < 2 {
                return Err(Error::Empty("fidelity pairs"));
            }
            (fidelities(outputs), fidelities(&reference))
        }
        SampleSpace::Statevector => {
            (outputs.iter().map(canonical_vector).collect(), reference.iter().map(canonical_vector).collect())
        }
    };
    Ok(1.0 - mmd(&x, &y, sigma)?)
}

/// Output states of `count` circuits with uniformly drawn angles.
pub fn sample_outputs(spec: &CircuitSpec, count: usize, random_inputs: bool, rng: &mut impl Rng) -> Vec<StateVector> {
    let n = spec.n_qubits;
    (0..count)
        .map(|_| {
            let theta: Vec<f64> = (0..spec.n_trainable).map(|_| rng.random::<f64>() * TAU).collect();
            let x: Vec<f64> = if random_inputs { (0..n).map(|_| rng.random::<f64>() * PI).collect() } else { vec![0.0; n] };
            spec.run_unchecked(&x, None, &theta)
        })
        .collect()
}

fn circuit(config: EntanglerConfig, n: usize, layers: usize) -> Result<CircuitSpec> {
    CircuitSpec::embedding(n, layers, config, false)
}

/// Mean Meyer-Wallach Q over `n_samples` random circuits.
pub fn entangling_capability(config: EntanglerConfig, n: usize, layers: usize, n_samples: usize, seed: u64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Empty("circuit samples"));
    }
    let spec = circuit(config, n, layers)?;
    let states = sample_outputs(&spec, n_samples, true, &mut ChaCha8Rng::seed_from_u64(seed));
    mean_q(&states)
}

fn mean_q(states: &[StateVector]) -> Result<f64> {
    Ok(states.iter().map(meyer_wallach_q).sum::<Result<f64>>()? / states.len() as f64)
}

/// `1 − MMD` in the default fidelity space with `σ = 0.01`.
pub fn expressivity(config: EntanglerConfig, n: usize, layers: usize, n_samples: usize, seed: u64) -> Result<f64> {
    let settings = MetricsConfig { n_qubits: n, layers, samples: n_samples, ..MetricsConfig::default() };
    Ok(settings.estimate(config, &mut ChaCha8Rng::seed_from_u64(seed))?.1)
}

/// Settings for a full comparison of entangler configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub configs: Vec<EntanglerConfig>,
    pub n_qubits: usize,
    pub layers: usize,
    /// Circuits sampled per run.
    pub samples: usize,
    pub runs: usize,
    pub seed: u64,
    pub sigma: f64,
    pub sample_space: SampleSpace,
    /// Draw data angles at random; otherwise they are all zero.
    pub random_inputs: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            configs: EntanglerConfig::ALL.to_vec(),
            n_qubits: 4,
            layers: 1,
            samples: 1000,
            runs: 20,
            seed: 0,
            sigma: 0.01,
            sample_space: SampleSpace::Fidelity,
            random_inputs: true,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::Config(format!("Meyer-Wallach Q needs at least 2 qubits, got {}", self.n_qubits)));
        }
        if self.n_qubits > 10 {
            return Err(Error::Config(format!("n_qubits {} is beyond dense simulation", self.n_qubits)));
        }
        if self.samples < 2 || self.runs == 0 {
            return Err(Error::Config("need at least 2 samples and 1 run".into()));
        }
        if self.configs.is_empty() {
            return Err(Error::Config("no entangler configurations".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// `(Ent, Expr)` from one batch of sampled circuits.
    fn estimate(&self, config: EntanglerConfig, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
        let spec = circuit(config, self.n_qubits, self.layers)?;
        let states = sample_outputs(&spec, self.samples, self.random_inputs, rng);
        let ent = mean_q(&states)?;
        let expr = expressivity_of_states(&states, self.sample_space, self.sigma, rng)?;
        Ok((ent, expr))
    }

    /// Independent stream per (configuration, run), so adding configurations or
    /// runs leaves existing results unchanged.
    fn run_rng(&self, config: EntanglerConfig, run: usize) -> ChaCha8Rng {
        let index = EntanglerConfig::ALL.iter().position(|&c| c == config).unwrap_or(0) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((index << 32) | run as u64);
        rng
    }
}

/// One sampled run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRun {
    pub config: EntanglerConfig,
    pub n: usize,
    pub layers: usize,
    pub run: usize,
    pub ent: f64,
    pub expr: f64,
}

/// Box-plot statistics with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxStats {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("values"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Ok(Self { min: v[0], q1: q(0.25), median: q(0.5), q3: q(0.75), max: v[v.len() - 1] })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.q1 <= x && x <= self.q3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config: EntanglerConfig,
    pub n_qubits: usize,
    pub layers: usize,
    pub samples: usize,
    pub runs: usize,
    pub ent_mean: f64,
    pub ent_std: f64,
    pub expr_mean: f64,
    pub expr_std: f64,
    pub ent: BoxStats,
    pub expr: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsOutput {
    pub runs: Vec<MetricRun>,
    pub reports: Vec<MetricReport>,
}

/// Every run of every configuration, in parallel across runs; results are
/// ordered by configuration then run.
pub fn run_metrics(settings: &MetricsConfig) -> Result<MetricsOutput> {
    settings.validate()?;
    let jobs: Vec<(EntanglerConfig, usize)> =
        settings.configs.iter().flat_map(|&c| (0..settings.runs).map(move |r| (c, r))).collect();
    let runs: Vec<MetricRun> = jobs
        .par_iter()
        .map(|&(config, run)| {
            let (ent, expr) = settings.estimate(config, &mut settings.run_rng(config, run))?;
            Ok(MetricRun { config, n: settings.n_qubits, layers: settings.layers, run, ent, expr })
        })
        .collect::<Result<_>>()?;

    let reports = settings
        .configs
        .iter()
        .map(|&config| {
            let mine: Vec<&MetricRun> = runs.iter().filter(|r| r.config == config).collect();
            let ent: Vec<f64> = mine.iter().map(|r| r.ent).collect();
            let expr: Vec<f64> = mine.iter().map(|r| r.expr).collect();
            let (ent_mean, ent_std) = crate::noiselab::mean_std(&ent);
            let (expr_mean, expr_std) = crate::noiselab::mean_std(&expr);
            Ok(MetricReport {
                config,
                n_qubits: settings.n_qubits,
                layers: settings.layers,
                samples: settings.samples,
                runs: mine.len(),
                ent_mean,
                ent_std,
                expr_mean,
                expr_std,
                ent: BoxStats::of(&ent)?,
                expr: BoxStats::of(&expr)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(MetricsOutput { runs, reports })
}

/// `config,n,L,run,ent,expr`, one row per run.
pub fn metrics_csv(runs: &[MetricRun]) -> String {
    let mut out = String::from("config,n,L,run,ent,expr\n");
    for r in runs {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.config.label(), r.n, r.layers, r.run, r.ent, r.expr);
    }
    out
}

#[cfg(test)]
mod tests;
