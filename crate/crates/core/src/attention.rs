//! Quantum self-attention: mixed-state queries and keys, trace-overlap
//! coefficients, row normalization, measured values and residual outputs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::embed::{run_embedding, EmbeddingParams, EntanglerConfig, PositionalAngles, ScaledInput};
use crate::error::{Error, Result};
use crate::qcore::{trace_overlap, DensityMatrix, StateVector};

/// How attention coefficients are formed.
///
/// `MixedTrace` reduces query and key states to their first `n/2` qubits and
/// uses `tr(ρσ)`. `PureKernel` is the pure-state ablation: the squared overlap
/// of the full-register states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionMode {
    #[default]
    MixedTrace,
    PureKernel,
}

impl AttentionMode {
    /// `"M"` (mixed) or `"P"` (pure), the suffix used in run labels.
    pub fn label(self) -> &'static str {
        match self {
            AttentionMode::MixedTrace => "M",
            AttentionMode::PureKernel => "P",
        }
    }

    /// Checks that `n_qubits` admits this mode.
    pub fn check(self, n_qubits: usize) -> Result<()> {
        if self == AttentionMode::MixedTrace && n_qubits % 2 != 0 {
            return Err(Error::InvalidSubsystem(format!(
                "mixed-state attention splits the register in half; {n_qubits} qubits is odd"
            )));
        }
        Ok(())
    }
}

/// Everything computed by one attention pass over a sequence. Matrices are
/// row-major `Vec` of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionArtifacts {
    pub tokens: Vec<String>,
    pub raw_alpha: Vec<Vec<f64>>,
    pub coeffs: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

/// `tr_B |ψ⟩⟨ψ|` keeping the first `keep` qubits, computed as `ΨΨ†` with `Ψ`
/// the `2^keep × 2^(n-keep)` reshaping of the amplitudes.
pub(crate) fn reduce_pure(psi: &StateVector, keep: usize) -> DMatrix<Complex64> {
    let da = 1usize << keep;
    let db = psi.dim() / da;
    // row-major Ψ[a, b] = ψ[a·db + b] is column-major Ψᵀ
    let psi_t = DMatrix::from_column_slice(db, da, psi.amplitudes());
    psi_t.transpose() * psi_t.map(|c| c.conj())
}

fn reduced_embedding(
    x: &ScaledInput,
    t: Option<&PositionalAngles>,
    theta: &EmbeddingParams,
    layers: usize,
    config: EntanglerConfig,
) -> Result<DensityMatrix> {
    AttentionMode::MixedTrace.check(x.0.len())?;
    let psi = run_embedding(x, t, theta, layers, config)?;
    let keep = psi.n_qubits() / 2;
    Ok(DensityMatrix::from_raw(keep, reduce_pure(&psi, keep)))
}

/// `ρ_q = tr_B |x_q⟩⟨x_q|` on the first `n/2` qubits.
pub fn query_state(
    x: &ScaledInput,
    t: Option<&PositionalAngles>,
    theta_q: &EmbeddingParams,
    layers: usize,
    config: EntanglerConfig,
) -> Result<DensityMatrix> {
    reduced_embedding(x, t, theta_q, layers, config)
}

/// `σ_k = tr_B |x_k⟩⟨x_k|` on the first `n/2` qubits.
pub fn key_state(
    x: &ScaledInput,
    t: Option<&PositionalAngles>,
    theta_k: &EmbeddingParams,
    layers: usize,
    config: EntanglerConfig,
) -> Result<DensityMatrix> {
    reduced_embedding(x, t, theta_k, layers, config)
}

/// `⟨Z_i⟩` of the value embedding for every qubit.
pub fn value_vector(
    x: &ScaledInput,
    t: Option<&PositionalAngles>,
    theta_v: &EmbeddingParams,
    layers: usize,
    config: EntanglerConfig,
) -> Result<Vec<f64>> {
    Ok(run_embedding(x, t, theta_v, layers, config)?.z_expectations())
}

/// `α[s][j] = tr(ρ_s σ_j)`.
///
/// Both modes reduce to the trace overlap of the supplied operands: mixed
/// mode is handed reduced states, pure mode full-register projectors, for
/// which `tr(|ψ⟩⟨ψ| |φ⟩⟨φ|) = |⟨ψ|φ⟩|²`. Pure-mode inputs are checked for
/// purity.
pub fn raw_attention(queries: &[DensityMatrix], keys: &[DensityMatrix], mode: AttentionMode) -> Result<Vec<Vec<f64>>> {
    if queries.len() != keys.len() {
        return Err(Error::DimensionMismatch { expected: queries.len(), got: keys.len() });
    }
    if mode == AttentionMode::PureKernel {
        if let Some(bad) = queries.iter().chain(keys).find(|r| (r.purity() - 1.0).abs() > 1e-8) {
            return Err(Error::InvalidState(format!("pure-kernel attention got purity {}", bad.purity())));
        }
    }
    queries
        .iter()
        .map(|rho| keys.iter().map(|sigma| trace_overlap(rho, sigma)).collect())
        .collect()
}

/// Divides each row by its sum.
pub fn normalize_rows(raw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    raw.iter()
        .enumerate()
        .map(|(row, r)| {
            let sum: f64 = r.iter().sum();
            if sum <= 1e-15 {
                return Err(Error::DegenerateAttentionRow { row, sum });
            }
            Ok(r.iter().map(|a| a / sum).collect())
        })
        .collect()
}

/// `y_s = x'_s + Σ_j C[s][j] v_j`.
pub fn residual_outputs(x_scaled: &[Vec<f64>], coeffs: &[Vec<f64>], values: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let s_len = x_scaled.len();
    if coeffs.len() != s_len || values.len() != s_len {
        return Err(Error::DimensionMismatch { expected: s_len, got: coeffs.len().max(values.len()) });
    }
    let width = x_scaled.first().map_or(0, Vec::len);
    for row in x_scaled.iter().chain(values) {
        if row.len() != width {
            return Err(Error::DimensionMismatch { expected: width, got: row.len() });
        }
    }
    if let Some(bad) = coeffs.iter().find(|r| r.len() != s_len) {
        return Err(Error::DimensionMismatch { expected: s_len, got: bad.len() });
    }
    Ok(x_scaled
        .iter()
        .zip(coeffs)
        .map(|(x, c)| {
            let mut y = x.clone();
            for (cj, v) in c.iter().zip(values) {
                for (yi, vi) in y.iter_mut().zip(v) {
                    *yi += cj * vi;
                }
            }
            y
        })
        .collect())
}
