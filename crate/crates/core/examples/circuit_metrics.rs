//! Entangling capability and expressivity of the three layouts at four
//! qubits, summarized as box-plot statistics.

use qmsan::circmetrics::{run_metrics, MetricsConfig};

pub fn run_example() -> qmsan::Result<()> {
    let settings = MetricsConfig { samples: 300, runs: 8, ..MetricsConfig::default() };
    let out = run_metrics(&settings)?;
    println!("n={} L={} {} runs × {} circuits", settings.n_qubits, settings.layers, settings.runs, settings.samples);
    for r in &out.reports {
        println!(
            "{:<2} Ent median {:.4} [{:.4}, {:.4}]  Expr median {:.4} [{:.4}, {:.4}]",
            r.config.label(),
            r.ent.median,
            r.ent.q1,
            r.ent.q3,
            r.expr.median,
            r.expr.q1,
            r.expr.q3
        );
    }
    Ok(())
}

fn main() -> qmsan::Result<()> {
    run_example()
}
