//! Noise-robustness experiments: noise plans, noisy forward passes and sweeps.
//!
//! For comparison, the published sweep reports 87.02 ± 0.71 test accuracy for
//! the Amazon Ring model with pure-kernel attention under `D(0.1_s)`.

mod plan;
mod sweep;

pub use plan::{ChannelKind, NoisePlan, SingleQubitNoise};
pub use sweep::{mean_std, noise_sweep, noisy_forward, sweep_csv, write_sweep_csv, SweepMode, SweepRow, Trial};
