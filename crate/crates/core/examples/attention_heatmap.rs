//! Attention coefficients of a trained model, with and without positional
//! encoding, drawn as a text heat map.

use qmsan::textdata::{mc_fixture, tokenize};
use qmsan::train::{forward, train, TrainConfig};

const SHADES: [char; 5] = [' ', '░', '▒', '▓', '█'];

fn draw(tokens: &[String], coeffs: &[Vec<f64>]) {
    for (tok, row) in tokens.iter().zip(coeffs) {
        let cells: String = row.iter().map(|&c| SHADES[((c * 4.0).round() as usize).min(4)].to_string().repeat(3)).collect();
        println!("{tok:>10} |{cells}| {row:.3?}");
    }
}

pub fn run_example() -> qmsan::Result<()> {
    let corpus = mc_fixture();
    let sentence = tokenize("skillful woman bakes tasty meal")?;
    for positional in [false, true] {
        let config = TrainConfig { positional, max_iters: 200, ..TrainConfig::default() };
        let model = train(&corpus, &config)?.model;
        let (y_hat, art) = forward(&sentence, &model)?;
        println!("positional = {positional}, ŷ = {y_hat:.3}");
        draw(&art.tokens, &art.coeffs);
    }
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
