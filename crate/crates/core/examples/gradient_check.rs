//! Exact reverse-mode gradients through the simulated circuits compared with
//! central finite differences, with and without noise.

use qmsan::attention::AttentionMode;
use qmsan::noiselab::NoisePlan;
use qmsan::textdata::{Sample, Vocab};
use qmsan::train::{gradients, Model, TrainConfig};

fn sample(s: &str, label: u8) -> Sample {
    Sample { tokens: s.split_whitespace().map(str::to_string).collect(), label }
}

pub fn run_example() -> qmsan::Result<()> {
    let batch = vec![sample("chef cooks meal", 1), sample("coder writes code", 0)];
    let vocab = Vocab::from_samples(&batch);
    for (mode, noise) in [
        (AttentionMode::MixedTrace, NoisePlan::none()),
        (AttentionMode::PureKernel, NoisePlan::none()),
        (AttentionMode::MixedTrace, "D(0.05_s+0.02_t)".parse()?),
    ] {
        let config = TrainConfig { mode, noise, positional: true, init_sigma: 0.8, sequence_length: 3, ..TrainConfig::default() };
        let model = Model::init(config, vocab.clone())?;
        let analytic = gradients(&model, &batch)?.grad;
        let base = model.state.flatten();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..base.len() {
            let loss_at = |delta: f64| -> qmsan::Result<f64> {
                let mut m = model.clone();
                let mut p = base.clone();
                p[i] += delta;
                m.state.assign(&p)?;
                Ok(gradients(&m, &batch)?.loss)
            };
            let fd = (loss_at(h)? - loss_at(-h)?) / (2.0 * h);
            worst = worst.max((analytic[i] - fd).abs() / fd.abs().max(1e-6));
        }
        println!("{mode:?} {noise}: {} coordinates, worst relative error {worst:.2e}", base.len());
    }
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
