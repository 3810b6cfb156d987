//! Sinusoidal positional encodings mapped onto rotation angles in `[0, 2π]`,
//! next to word vectors mapped onto `[0, π]`.

use qmsan::embed::{positional_angles, scale_inputs, sinusoidal_pe};

pub fn run_example() -> qmsan::Result<()> {
    let n = 4;
    let seq_len = 6;
    let angles = positional_angles(seq_len, n)?;
    for (s, t) in angles.iter().enumerate() {
        println!("pos {s}: pe {:>7.3?}  angles {:>6.3?}", sinusoidal_pe(s, n), t.0);
    }
    assert!(angles.iter().flat_map(|t| &t.0).all(|a| (0.0..=std::f64::consts::TAU).contains(a)));

    let words = vec![vec![-0.2, 0.05, 0.1, 0.3], vec![0.0, -0.1, 0.12, -0.04]];
    for (w, x) in words.iter().zip(scale_inputs(&words)?) {
        println!("word {w:>6.2?} -> {:>6.3?}", x.0);
    }
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
