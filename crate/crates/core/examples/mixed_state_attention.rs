//! One self-attention pass done by hand: query and key circuits are reduced
//! to mixed states on half the register, scored by trace overlap, and
//! row-normalized; value circuits supply `⟨Z_i⟩`.

use qmsan::attention::{key_state, normalize_rows, query_state, raw_attention, residual_outputs, value_vector, AttentionMode};
use qmsan::embed::{embedding_param_count, positional_angles, scale_inputs, EmbeddingParams, EntanglerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn run_example() -> qmsan::Result<()> {
    let (n, layers, cfg) = (4, 1, EntanglerConfig::AllToAll);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut params = || EmbeddingParams::new((0..embedding_param_count(n, layers, cfg)).map(|_| normal.sample(&mut rng)).collect());
    let (theta_q, theta_k, theta_v) = (params(), params(), params());

    let words: Vec<Vec<f64>> = vec![vec![0.3, -0.1, 0.2, 0.0], vec![-0.2, 0.4, 0.1, 0.1], vec![0.1, 0.1, -0.3, 0.2]];
    let xs = scale_inputs(&words)?;
    let ts = positional_angles(xs.len(), n)?;

    let mut queries = Vec::new();
    let mut keys = Vec::new();
    let mut values = Vec::new();
    for (x, t) in xs.iter().zip(&ts) {
        queries.push(query_state(x, Some(t), &theta_q, layers, cfg)?);
        keys.push(key_state(x, Some(t), &theta_k, layers, cfg)?);
        values.push(value_vector(x, Some(t), &theta_v, layers, cfg)?);
    }
    for (s, q) in queries.iter().enumerate() {
        println!("query {s}: purity {:.4} on {} qubits", q.purity(), q.n_qubits());
    }

    let raw = raw_attention(&queries, &keys, AttentionMode::MixedTrace)?;
    let coeffs = normalize_rows(&raw)?;
    for (r, c) in raw.iter().zip(&coeffs) {
        println!("α {r:.4?}  C {c:.4?}");
    }
    let xs_plain: Vec<Vec<f64>> = xs.iter().map(|x| x.0.clone()).collect();
    for (s, y) in residual_outputs(&xs_plain, &coeffs, &values)?.iter().enumerate() {
        println!("y_{s} = {y:.4?}");
    }
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
