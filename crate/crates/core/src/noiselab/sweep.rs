use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::NoisePlan;
use crate::error::Result;
use crate::textdata::Corpus;
use crate::train::{evaluate_with_noise, train, Model};

/// `ŷ` for one sentence with every embedding circuit run under `plan`.
pub fn noisy_forward(tokens: &[String], model: &Model, plan: &NoisePlan) -> Result<f64> {
    plan.validate()?;
    Ok(model.forward_with_noise(tokens, plan)?.0)
}

/// Whether a sweep reuses the trained parameters or trains again under each
/// plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Evaluate the given models with the noise switched on.
    EvalOnly,
    /// Train from the same seed with the noise present, then evaluate under it.
    #[default]
    Retrain,
}

/// One independent repetition: a trained model with its data split.
#[derive(Debug, Clone)]
pub struct Trial {
    pub model: Model,
    pub train: Corpus,
    pub test: Corpus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub plan: NoisePlan,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub n_runs: usize,
    /// Test accuracy of every trial, in trial order.
    pub accuracies: Vec<f64>,
}

/// Test accuracy of every trial under every plan. Plans run in parallel; rows
/// come back in plan order.
pub fn noise_sweep(trials: &[Trial], plans: &[NoisePlan], mode: SweepMode) -> Result<Vec<SweepRow>> {
    for plan in plans {
        plan.validate()?;
    }
    plans
        .par_iter()
        .map(|plan| {
            let accuracies = trials.iter().map(|t| trial_accuracy(t, plan, mode)).collect::<Result<Vec<_>>>()?;
            let (acc_mean, acc_std) = mean_std(&accuracies);
            Ok(SweepRow { plan: *plan, acc_mean, acc_std, n_runs: accuracies.len(), accuracies })
        })
        .collect()
}

fn trial_accuracy(trial: &Trial, plan: &NoisePlan, mode: SweepMode) -> Result<f64> {
    match mode {
        SweepMode::EvalOnly => evaluate_with_noise(&trial.test, &trial.model, plan),
        SweepMode::Retrain => {
            let mut config = trial.model.config.clone();
            config.noise = *plan;
            let model = train(&trial.train, &config)?.model;
            evaluate_with_noise(&trial.test, &model, plan)
        }
    }
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("plan,acc_mean,acc_std,n_runs\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.plan, r.acc_mean, r.acc_std, r.n_runs);
    }
    out
}

pub fn write_sweep_csv(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    std::fs::write(path, sweep_csv(rows))?;
    Ok(())
}
