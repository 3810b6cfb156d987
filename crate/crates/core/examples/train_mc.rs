//! Train on the bundled two-topic corpus with the MC hyperparameters and
//! report accuracy for each entangler layout.

use qmsan::embed::EntanglerConfig;
use qmsan::textdata::{mc_fixture, split, SplitScheme};
use qmsan::train::{evaluate, train, Dataset, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> qmsan::Result<()> {
    let corpus = mc_fixture();
    let fold = split(&corpus, SplitScheme::Holdout { test_fraction: 0.2 }, &mut ChaCha8Rng::seed_from_u64(0))?.remove(0);
    let (train_set, test_set) = (corpus.subset(&fold.train), corpus.subset(&fold.test));
    println!("{} training and {} test sentences", train_set.len(), test_set.len());

    for cfg in EntanglerConfig::ALL {
        let config = TrainConfig { max_iters: 300, ..TrainConfig::preset(Dataset::Mc, cfg, false) };
        let out = train(&train_set, &config)?;
        let loss: Vec<String> = out.history.iter().step_by(60).map(|h| format!("{:.4}", h.loss)).collect();
        println!(
            "{:<2} lr {:<5} params {:>2}: loss {} | train {:.3} test {:.3}",
            cfg.label(),
            config.learning_rate,
            out.model.param_count(),
            loss.join(" → "),
            evaluate(&train_set, &out.model)?,
            evaluate(&test_set, &out.model)?
        );
    }
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
