//! Trainable embedding circuits `U_emb(x, θ, L) = V(x) Π_l W_l(θ_l) V(x)` with
//! optional fixed positional rotations.
//!
//! A data block `V(x)` is one `Rx(x_i)` per qubit, followed by `Rx(t_i)` per
//! qubit when positional encoding is on. A trainable block `W(θ_l)` is one
//! `Rzz` per entangler pair followed by one `Ry` per qubit.

mod adjoint;
mod scaling;

pub use adjoint::{MixedTape, NoiseChannels};
pub use scaling::{positional_angles, scale_inputs, scale_positions, sinusoidal_pe, InputScaler, PositionalAngles, ScaledInput};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noiselab::NoisePlan;
use crate::qcore::{DensityMatrix, Gate, GateKind, StateVector};

/// Two-qubit interaction pattern of the trainable blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglerConfig {
    Ring,
    CircuitBlock,
    AllToAll,
}

impl EntanglerConfig {
    pub const ALL: [EntanglerConfig; 3] = [EntanglerConfig::Ring, EntanglerConfig::CircuitBlock, EntanglerConfig::AllToAll];

    /// `Rzz` qubit pairs of one trainable block, in application order.
    ///
    /// Ring: `(0,1), (1,2), …, (n−2,n−1), (n−1,0)`. Circuit-block: the same
    /// adjacent chain closed by `(0,n−1)` (for `n = 2`, `(1,0)`). All-to-all:
    /// every unordered pair in lexicographic order.
    pub fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        if n < 2 {
            return Vec::new();
        }
        let chain = (0..n - 1).map(|i| (i, i + 1));
        match self {
            EntanglerConfig::Ring => chain.chain(std::iter::once((n - 1, 0))).collect(),
            EntanglerConfig::CircuitBlock => {
                let close = if n == 2 { (1, 0) } else { (0, n - 1) };
                chain.chain(std::iter::once(close)).collect()
            }
            EntanglerConfig::AllToAll => (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
        }
    }

    /// Short label: `R`, `CB` or `AA`.
    pub fn label(self) -> &'static str {
        match self {
            EntanglerConfig::Ring => "R",
            EntanglerConfig::CircuitBlock => "CB",
            EntanglerConfig::AllToAll => "AA",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" | "ring" => Some(EntanglerConfig::Ring),
            "cb" | "circuit_block" | "circuit-block" => Some(EntanglerConfig::CircuitBlock),
            "aa" | "all_to_all" | "all-to-all" => Some(EntanglerConfig::AllToAll),
            _ => None,
        }
    }
}

/// Trainable angles per embedding: `layers × (|pairs| + n)`.
pub fn embedding_param_count(n: usize, layers: usize, config: EntanglerConfig) -> usize {
    layers * (config.pairs(n).len() + n)
}

/// Circuit plus classifier parameters for the three embeddings (query, key,
/// value) and the `n + 1` classifier weights. Word-embedding rows are not
/// counted.
pub fn model_param_count(n: usize, layers: usize, config: EntanglerConfig) -> usize {
    3 * embedding_param_count(n, layers, config) + n + 1
}

/// Angles of one embedding circuit, laid out per layer as
/// `[Rzz per pair…, Ry per qubit…]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub theta: Vec<f64>,
}

impl EmbeddingParams {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn zeros(len: usize) -> Self {
        Self { theta: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Where a gate's angle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ParamBinding {
    /// Scaled input entry `x'_i`.
    Data { slot: usize },
    /// Positional angle `t_i`; never differentiated.
    Position { slot: usize },
    /// Index into the embedding's trainable vector.
    Trainable { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub binding: ParamBinding,
}

/// Structure of an embedding circuit: the ordered gate list with parameter
/// bindings but no bound values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub layers: usize,
    pub entangler: EntanglerConfig,
    pub positional: bool,
    pub n_trainable: usize,
    pub ops: Vec<CircuitOp>,
}

impl CircuitSpec {
    pub fn embedding(n_qubits: usize, layers: usize, entangler: EntanglerConfig, positional: bool) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidCircuit(format!("embedding needs at least 2 qubits, got {n_qubits}")));
        }
        let pairs = entangler.pairs(n_qubits);
        let mut ops = Vec::new();
        let data_block = |ops: &mut Vec<CircuitOp>| {
            for q in 0..n_qubits {
                ops.push(CircuitOp { kind: GateKind::Rx, targets: vec![q], binding: ParamBinding::Data { slot: q } });
                if positional {
                    ops.push(CircuitOp { kind: GateKind::Rx, targets: vec![q], binding: ParamBinding::Position { slot: q } });
                }
            }
        };
        let mut index = 0;
        for _ in 0..layers {
            data_block(&mut ops);
            for &(a, b) in &pairs {
                ops.push(CircuitOp { kind: GateKind::Rzz, targets: vec![a, b], binding: ParamBinding::Trainable { index } });
                index += 1;
            }
            for q in 0..n_qubits {
                ops.push(CircuitOp { kind: GateKind::Ry, targets: vec![q], binding: ParamBinding::Trainable { index } });
                index += 1;
            }
        }
        data_block(&mut ops);
        debug_assert_eq!(index, embedding_param_count(n_qubits, layers, entangler));
        Ok(Self { n_qubits, layers, entangler, positional, n_trainable: index, ops })
    }

    pub fn check_inputs(&self, x: &ScaledInput, t: Option<&PositionalAngles>, params: &EmbeddingParams) -> Result<()> {
        if x.0.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: x.0.len() });
        }
        if params.len() != self.n_trainable {
            return Err(Error::InvalidCircuit(format!(
                "expected {} trainable angles, got {}",
                self.n_trainable,
                params.len()
            )));
        }
        match (self.positional, t) {
            (true, None) => Err(Error::InvalidCircuit("positional circuit needs positional angles".into())),
            (true, Some(t)) if t.0.len() != self.n_qubits => {
                Err(Error::DimensionMismatch { expected: self.n_qubits, got: t.0.len() })
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub(crate) fn angle(op: &CircuitOp, x: &[f64], t: Option<&[f64]>, theta: &[f64]) -> f64 {
        match op.binding {
            ParamBinding::Data { slot } => x[slot],
            ParamBinding::Position { slot } => t.map_or(0.0, |t| t[slot]),
            ParamBinding::Trainable { index } => theta[index],
        }
    }

    /// Concrete gates with every binding resolved.
    pub fn bind(&self, x: &ScaledInput, t: Option<&PositionalAngles>, params: &EmbeddingParams) -> Result<Vec<Gate>> {
        self.check_inputs(x, t, params)?;
        let t = t.map(|t| t.0.as_slice());
        Ok(self
            .ops
            .iter()
            .map(|op| Gate {
                kind: op.kind,
                angle: Self::angle(op, &x.0, t, &params.theta),
                targets: op.targets.clone(),
            })
            .collect())
    }

    /// `U_emb |0…0⟩`.
    pub fn run(&self, x: &ScaledInput, t: Option<&PositionalAngles>, params: &EmbeddingParams) -> Result<StateVector> {
        self.check_inputs(x, t, params)?;
        Ok(self.run_unchecked(&x.0, t.map(|t| t.0.as_slice()), &params.theta))
    }

    pub(crate) fn run_unchecked(&self, x: &[f64], t: Option<&[f64]>, theta: &[f64]) -> StateVector {
        let mut psi = StateVector::zero(self.n_qubits);
        for op in &self.ops {
            psi.apply_unchecked(op.kind, Self::angle(op, x, t, theta), &op.targets);
        }
        psi
    }

    /// Density-matrix evolution with channels inserted per `plan`.
    pub fn run_noisy(
        &self,
        x: &ScaledInput,
        t: Option<&PositionalAngles>,
        params: &EmbeddingParams,
        plan: &NoisePlan,
    ) -> Result<DensityMatrix> {
        self.check_inputs(x, t, params)?;
        let channels = NoiseChannels::from_plan(plan)?;
        Ok(self.run_mixed_taped(&x.0, t.map(|t| t.0.as_slice()), &params.theta, &channels, false).final_state())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Validates the inputs and returns the embedding circuit structure.
pub fn build_circuit(
    x: &ScaledInput,
    t: Option<&PositionalAngles>,
    params: &EmbeddingParams,
    layers: usize,
    config: EntanglerConfig,
) -> Result<CircuitSpec> {
    let spec = CircuitSpec::embedding(x.0.len(), layers, config, t.is_some())?;
    spec.check_inputs(x, t, params)?;
    Ok(spec)
}

pub fn run_embedding(
    x: &ScaledInput,
    t: Option<&PositionalAngles>,
    params: &EmbeddingParams,
    layers: usize,
    config: EntanglerConfig,
) -> Result<StateVector> {
    build_circuit(x, t, params, layers, config)?.run(x, t, params)
}

pub fn run_embedding_noisy(
    x: &ScaledInput,
    t: Option<&PositionalAngles>,
    params: &EmbeddingParams,
    layers: usize,
    config: EntanglerConfig,
    plan: &NoisePlan,
) -> Result<DensityMatrix> {
    build_circuit(x, t, params, layers, config)?.run_noisy(x, t, params, plan)
}
