//! Quantum mixed-state self-attention, simulated exactly.
//!
//! Word vectors are loaded into parameterized circuits; query/key states are
//! compared through the overlap of reduced density matrices (or of full pure
//! states), and value circuits supply Pauli-Z expectations. Everything runs on
//! dense statevectors or density matrices, so gradients are exact and noise
//! channels are applied as Kraus maps.
//!
//! The `examples/` directory is the best place to start.

pub mod attention;
pub mod circmetrics;
pub mod cli;
pub mod embed;
pub mod error;
pub mod noiselab;
pub mod qcore;
pub mod textdata;
pub mod train;

pub use error::{Error, Result};
