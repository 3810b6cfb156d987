//! Evaluate a trained model under single-qubit and two-qubit noise plans and
//! print the sweep as CSV.

use qmsan::noiselab::{noise_sweep, sweep_csv, NoisePlan, SweepMode, Trial};
use qmsan::textdata::{mc_fixture, split, SplitScheme};
use qmsan::train::{train, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> qmsan::Result<()> {
    let corpus = mc_fixture();
    let mut trials = Vec::new();
    for seed in 0..2 {
        let fold = split(&corpus, SplitScheme::Holdout { test_fraction: 0.2 }, &mut ChaCha8Rng::seed_from_u64(seed))?.remove(0);
        let (train_set, test) = (corpus.subset(&fold.train), corpus.subset(&fold.test));
        let model = train(&train_set, &TrainConfig { seed, max_iters: 300, ..TrainConfig::default() })?.model;
        trials.push(Trial { model, train: train_set, test });
    }

    let plans = ["none", "D(0.1_s)", "AD(0.1_s)", "PD(0.1_s)", "D(0.05_t)", "D(0.01_s+0.05_t)"]
        .iter()
        .map(|s| s.parse::<NoisePlan>())
        .collect::<qmsan::Result<Vec<_>>>()?;
    let rows = noise_sweep(&trials, &plans, SweepMode::EvalOnly)?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
