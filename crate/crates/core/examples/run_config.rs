//! Experiment configs as the command-line tool reads them: preset defaults,
//! overrides, the provenance hash, and the resulting runs and folds.

use std::path::Path;

use qmsan::cli::{cmd_inspect, jobs, RunConfig};

pub fn run_example() -> qmsan::Result<()> {
    let doc = r#"{
        "dataset": { "preset": "mc", "split": { "kind": "k_fold", "k": 4 } },
        "train": { "entangler": "all_to_all", "positional": true, "max_iters": 500 },
        "noise": { "plans": ["D(0.01_s)", "D(0.01_s+0.05_t)"], "mode": "eval_only" },
        "runs": 2,
        "seed": 7
    }"#;
    let cfg = RunConfig::from_json(doc, Path::new("."))?;
    println!("learning rate from the preset: {}", cfg.train.learning_rate);
    println!("config hash: {}", cfg.hash());
    for job in jobs(&cfg)? {
        println!("{}: seed {}, {} train / {} test", job.dir_name(), job.seed, job.train.len(), job.test.len());
    }
    print!("{}", cmd_inspect(&cfg)?.lines().take(3).map(|l| format!("{l}\n")).collect::<String>());

    let typo = RunConfig::from_json(r#"{"train": {"learning_rat": 0.1}}"#, Path::new("."));
    println!("typo rejected: {}", typo.unwrap_err());
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
