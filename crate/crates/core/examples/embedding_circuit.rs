//! The three entangler layouts, their parameter counts and one rendered
//! circuit.

use qmsan::embed::{
    embedding_param_count, model_param_count, run_embedding, CircuitSpec, EmbeddingParams, EntanglerConfig,
    ScaledInput,
};

pub fn run_example() -> qmsan::Result<()> {
    for (n, layers) in [(2, 1), (4, 1), (4, 2)] {
        for cfg in EntanglerConfig::ALL {
            println!(
                "n={n} L={layers} {:<2} pairs {:?}: {} angles per circuit, {} model parameters",
                cfg.label(),
                cfg.pairs(n),
                embedding_param_count(n, layers, cfg),
                model_param_count(n, layers, cfg)
            );
        }
    }

    let spec = CircuitSpec::embedding(2, 1, EntanglerConfig::Ring, false)?;
    for op in &spec.ops {
        println!("{:?} on {:?} <- {:?}", op.kind, op.targets, op.binding);
    }

    let x = ScaledInput(vec![0.4, 2.2]);
    let theta = EmbeddingParams::new((0..spec.n_trainable).map(|i| 0.3 * i as f64).collect());
    let psi = run_embedding(&x, None, &theta, 1, EntanglerConfig::Ring)?;
    println!("output amplitudes: {:.4?}", psi.amplitudes());
    println!("⟨Z⟩ per qubit: {:.4?}", psi.z_expectations());
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
