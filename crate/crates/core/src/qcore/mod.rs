//! Exact small-register quantum simulation.
//!
//! Basis convention: in an `n`-qubit register, qubit `q` is bit `n - 1 - q` of
//! the basis index, i.e. qubit 0 is the most significant bit and `|q0 q1 … ⟩`
//! reads left to right as a binary number. Every type and routine in the crate
//! uses this ordering.
//!
//! Everything is dense; registers of more than about ten qubits are out of
//! reach and not a goal.

mod channel;
mod density;
mod gate;
mod local;
pub mod random;
mod state;
mod swap;

pub use channel::{paulis, KrausChannel};
pub use density::{trace_overlap, DensityMatrix};
pub use gate::{Gate, GateKind};
pub use state::StateVector;
pub use swap::swap_test_probability;

pub(crate) use density::trace_of_product;
pub(crate) use local::{apply_local, conjugate, qubit_mask, to_row_major};

use crate::error::Result;

/// Returns `U|ψ⟩`.
pub fn apply_gate(state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.with_gate(gate)
}

/// Returns `UρU†`.
pub fn apply_gate_dm(rho: DensityMatrix, gate: &Gate) -> Result<DensityMatrix> {
    rho.with_gate(gate)
}

/// `|ψ⟩⟨ψ|`.
pub fn to_density(state: &StateVector) -> DensityMatrix {
    DensityMatrix::from_state(state)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// Returns `ε(ρ)` for `channel` acting on `targets`.
pub fn apply_channel(mut rho: DensityMatrix, channel: &KrausChannel, targets: &[usize]) -> Result<DensityMatrix> {
    rho.apply_channel(channel, targets)?;
    Ok(rho)
}
