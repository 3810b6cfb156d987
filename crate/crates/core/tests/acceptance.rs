//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as part of `cargo test` and always finishes; failures are reported,
//! not hidden. Set `QMSAN_ACCEPTANCE_STRICT=1` to exit non-zero when any
//! criterion fails. `QMSAN_ACCEPTANCE_ONLY=3,9` runs a subset.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmsan::attention::AttentionMode;
use qmsan::circmetrics::{meyer_wallach_q, run_metrics, MetricReport, MetricsConfig};
use qmsan::cli::{cmd_train, RunConfig};
use qmsan::embed::{model_param_count, positional_angles, EntanglerConfig, InputScaler};
use qmsan::noiselab::{noise_sweep, NoisePlan, SweepMode, Trial};
use qmsan::qcore::random::{haar_state, random_density, random_mixture};
use qmsan::qcore::{swap_test_probability, trace_overlap, DensityMatrix, KrausChannel, StateVector};
use qmsan::textdata::{lookup, mc_fixture, split, Corpus, Sample, SplitScheme, Vocab};
use qmsan::train::{evaluate, gradients, train, Dataset, Model, TrainConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- 1

fn swap_test_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let k = 1 + i % 2;
        let rho = random_density(k, &mut rng);
        let sigma = random_mixture(k, 1 + i % 3, &mut rng);
        let p0 = swap_test_probability(&rho, &sigma).unwrap();
        let expect = 0.5 + 0.5 * trace_overlap(&rho, &sigma).unwrap();
        worst = worst.max((p0 - expect).abs());
    }
    outcome(worst < 1e-10, format!("200 pairs, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 2

/// `Σ p_i q_j |⟨e_i|f_j⟩|²` from separate eigendecompositions.
fn overlap_by_spectra(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let a = rho.matrix().clone().symmetric_eigen();
    let b = sigma.matrix().clone().symmetric_eigen();
    let mut total = 0.0;
    for (i, p) in a.eigenvalues.iter().enumerate() {
        for (j, q) in b.eigenvalues.iter().enumerate() {
            let inner = a.eigenvectors.column(i).dotc(&b.eigenvectors.column(j));
            total += p * q * inner.norm_sqr();
        }
    }
    total
}

fn mixed_state_expansion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let k = 1 + i % 3;
        let rho = random_density(k, &mut rng);
        let sigma = random_mixture(k, 2, &mut rng);
        worst = worst.max((trace_overlap(&rho, &sigma).unwrap() - overlap_by_spectra(&rho, &sigma)).abs());
    }
    outcome(worst < 1e-10, format!("100 pairs, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 3

/// Reduced state by summing over every basis index of the discarded qubits.
fn brute_partial_trace(psi: &StateVector, keep: &[usize]) -> DMatrix<Complex64> {
    let n = psi.n_qubits();
    let drop: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let amps = psi.amplitudes();
    let index = |a: usize, b: usize| {
        let mut full = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            let bit = (a >> (keep.len() - 1 - pos)) & 1;
            full |= bit << (n - 1 - q);
        }
        for (pos, &q) in drop.iter().enumerate() {
            let bit = (b >> (drop.len() - 1 - pos)) & 1;
            full |= bit << (n - 1 - q);
        }
        full
    };
    let da = 1 << keep.len();
    let db = 1 << drop.len();
    DMatrix::from_fn(da, da, |a, a2| (0..db).map(|b| amps[index(a, b)] * amps[index(a2, b)].conj()).sum())
}

fn partial_trace_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let psi = haar_state(4, &mut rng);
        let mask = rng.random_range(1u32..15);
        let keep: Vec<usize> = (0..4).filter(|q| mask & (1 << q) != 0).collect();
        let fast = DensityMatrix::from_state(&psi).partial_trace(&keep).unwrap();
        let slow = brute_partial_trace(&psi, &keep);
        worst = worst.max((fast.matrix() - slow).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    outcome(worst < 1e-12, format!("100 states, max entry deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 4

fn sentence(s: &str, label: u8) -> Sample {
    Sample { tokens: s.split_whitespace().map(str::to_string).collect(), label }
}

fn gradient_check() -> Outcome {
    let batch = vec![sentence("chef cooks meal", 1), sentence("coder writes code", 0), sentence("meal code chef", 1)];
    let vocab = Vocab::from_samples(&batch);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut coords = 0;
    for mode in [AttentionMode::MixedTrace, AttentionMode::PureKernel] {
        for positional in [false, true] {
            for entangler in EntanglerConfig::ALL {
                let config = TrainConfig {
                    mode,
                    positional,
                    entangler,
                    n_qubits: 2,
                    layers: 1,
                    sequence_length: 3,
                    init_sigma: 0.8,
                    seed: 4,
                    ..TrainConfig::default()
                };
                let mut model = Model::init(config, vocab.clone()).unwrap();
                model.state.b = 0.2;
                let analytic = gradients(&model, &batch).unwrap().grad;
                let base = model.state.flatten();
                let loss_at = |p: &[f64]| {
                    let mut m = model.clone();
                    m.state.assign(p).unwrap();
                    gradients(&m, &batch).unwrap().loss
                };
                for i in 0..base.len() {
                    let (mut up, mut dn) = (base.clone(), base.clone());
                    up[i] += h;
                    dn[i] -= h;
                    let fd = (loss_at(&up) - loss_at(&dn)) / (2.0 * h);
                    worst = worst.max((analytic[i] - fd).abs() / fd.abs().max(1e-6));
                    coords += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-4, format!("12 combinations, {coords} coordinates, worst relative error {worst:.1e}"))
}

// ---------------------------------------------------------------- 5

fn holdout(corpus: &Corpus, seed: u64) -> (Corpus, Corpus) {
    let fold = split(corpus, SplitScheme::Holdout { test_fraction: 0.2 }, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().remove(0);
    (corpus.subset(&fold.train), corpus.subset(&fold.test))
}

fn mc_reproduction() -> Outcome {
    let corpus = mc_fixture();
    let mut parts = Vec::new();
    let mut pass = true;
    for entangler in EntanglerConfig::ALL {
        let mut perfect = 0;
        for seed in 0..15 {
            let (train_set, test_set) = holdout(&corpus, seed);
            let config = TrainConfig { seed, ..TrainConfig::preset(Dataset::Mc, entangler, false) };
            let model = train(&train_set, &config).unwrap().model;
            if evaluate(&train_set, &model).unwrap() == 1.0 && evaluate(&test_set, &model).unwrap() == 1.0 {
                perfect += 1;
            }
        }
        pass &= perfect >= 14;
        parts.push(format!("{} {perfect}/15", entangler.label()));
    }
    outcome(pass, format!("bundled fixture, runs at 100% train and test: {}", parts.join(", ")))
}

// ---------------------------------------------------------------- 6

fn parameter_counts() -> Outcome {
    let vocab = Vocab::from_samples(&mc_fixture().samples);
    let count = |dataset: Dataset, e: EntanglerConfig| {
        Model::init(TrainConfig::preset(dataset, e, false), vocab.clone()).unwrap().param_count()
    };
    let mc = count(Dataset::Mc, EntanglerConfig::Ring);
    let rp = count(Dataset::Rp, EntanglerConfig::Ring);
    let sentiment = count(Dataset::Imdb, EntanglerConfig::Ring);
    let aa = [(2, 1), (4, 2), (4, 1)].map(|(n, l)| model_param_count(n, l, EntanglerConfig::AllToAll));
    outcome(
        mc == 15 && rp == 53 && sentiment == 29,
        format!(
            "MC R {mc}, RP R {rp}, sentiment R {sentiment}; AA gives {}/{}/{} where the published table lists 18/137/71 (see README)",
            aa[0], aa[1], aa[2]
        ),
    )
}

// ---------------------------------------------------------------- 7

fn noise_robustness() -> Outcome {
    let corpus = mc_fixture();
    let trials: Vec<Trial> = (0..3)
        .map(|seed| {
            let (train_set, test) = holdout(&corpus, seed);
            let model = train(&train_set, &TrainConfig { seed, ..TrainConfig::default() }).unwrap().model;
            Trial { model, train: train_set, test }
        })
        .collect();
    let names = ["none", "D(0.01_s)", "D(0.1_s)", "AD(0.01_s)", "AD(0.1_s)", "PD(0.01_s)", "PD(0.1_s)", "D(0.01_s+0.05_t)"];
    let plans: Vec<NoisePlan> = names.iter().map(|s| s.parse().unwrap()).collect();
    let rows = noise_sweep(&trials, &plans, SweepMode::default()).unwrap();

    let clean = rows[0].acc_mean;
    let worst_drop = rows[1..7].iter().map(|r| clean - r.acc_mean).fold(f64::NEG_INFINITY, f64::max);
    let single = &rows[1].accuracies;
    let combined = &rows[7].accuracies;
    let worse = single.iter().zip(combined).filter(|(s, c)| c < s).count();
    let pass = worst_drop <= 0.05 && worse >= 2;
    outcome(
        pass,
        format!(
            "retrained under noise, 3 seeds: worst single-qubit drop {:.2} points; combined below D(0.01_s) in {worse}/3 seeds \
             (D(0.01_s) {single:?}, combined {combined:?})",
            100.0 * worst_drop
        ),
    )
}

// ---------------------------------------------------------------- 8

fn kraus_completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let p = if i == 0 { 0.0 } else if i == 1 { 1.0 } else { rng.random::<f64>() };
        for ch in [
            KrausChannel::depolarizing_1q(p).unwrap(),
            KrausChannel::depolarizing_2q(p).unwrap(),
            KrausChannel::amplitude_damping(p).unwrap(),
            KrausChannel::phase_damping(p).unwrap(),
        ] {
            worst = worst.max(ch.completeness_error());
        }
    }
    outcome(worst < 1e-12, format!("4 constructors × 100 levels, max |ΣK†K − I| {worst:.1e}"))
}

// ---------------------------------------------------------------- 9

fn find(reports: &[MetricReport], c: EntanglerConfig) -> &MetricReport {
    reports.iter().find(|r| r.config == c).unwrap()
}

fn metric_ordering() -> Outcome {
    let reports = run_metrics(&MetricsConfig::default()).unwrap().reports;
    let (r, cb, aa) =
        (find(&reports, EntanglerConfig::Ring), find(&reports, EntanglerConfig::CircuitBlock), find(&reports, EntanglerConfig::AllToAll));
    let aa_expr = aa.expr.median > r.expr.median && aa.expr.median > cb.expr.median;
    let aa_ent = aa.ent.median > r.ent.median && aa.ent.median > cb.ent.median;
    let similar_expr = r.expr.contains(cb.expr.median) && cb.expr.contains(r.expr.median);
    let similar_ent = r.ent.contains(cb.ent.median) && cb.ent.contains(r.ent.median);
    let fmt = |m: &MetricReport| {
        format!(
            "{} ent {:.4} [{:.4},{:.4}] expr {:.4} [{:.4},{:.4}]",
            m.config.label(),
            m.ent.median,
            m.ent.q1,
            m.ent.q3,
            m.expr.median,
            m.expr.q1,
            m.expr.q3
        )
    };
    outcome(
        aa_expr && aa_ent && similar_expr && similar_ent,
        format!(
            "AA>R,CB expr {aa_expr} ent {aa_ent}; R~CB expr {similar_expr} ent {similar_ent}; {}; {}; {}",
            fmt(r),
            fmt(cb),
            fmt(aa)
        ),
    )
}

// ---------------------------------------------------------------- 10

fn meyer_wallach_anchors() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_product: f64 = 0.0;
    for i in 0..100 {
        let n = 2 + i % 4;
        let psi = (1..n).fold(haar_state(1, &mut rng), |acc, _| acc.tensor(&haar_state(1, &mut rng)));
        worst_product = worst_product.max(meyer_wallach_q(&psi).unwrap());
    }
    let c = |v: f64| Complex64::new(v, 0.0);
    let bell = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
    let q_bell = meyer_wallach_q(&bell).unwrap();
    outcome(
        worst_product < 1e-10 && (q_bell - 1.0).abs() < 1e-10,
        format!("max Q over 100 product states {worst_product:.1e}, Q(Bell) = {q_bell:.12}"),
    )
}

// ---------------------------------------------------------------- 11

fn scaling_ranges() -> Outcome {
    let corpus = mc_fixture();
    let vocab = Vocab::from_samples(&corpus.samples);
    let mut checked = 0usize;
    let mut outside = 0usize;
    for dataset in Dataset::ALL {
        for positional in [false, true] {
            let config = TrainConfig::preset(dataset, EntanglerConfig::Ring, positional);
            let model = Model::init(config.clone(), vocab.clone()).unwrap();
            let scaler = InputScaler::fit(model.state.table.vocab_rows().iter().flatten()).unwrap();
            for s in &corpus.samples {
                for row in lookup(&model.state.table, &vocab, &s.tokens) {
                    for v in scaler.scale(&row).0 {
                        checked += 1;
                        outside += usize::from(!(0.0..=std::f64::consts::PI).contains(&v));
                    }
                }
            }
            for t in positional_angles(config.sequence_length, config.n_qubits).unwrap() {
                for v in t.0 {
                    checked += 1;
                    outside += usize::from(!(0.0..=std::f64::consts::TAU).contains(&v));
                }
            }
        }
    }
    outcome(outside == 0, format!("{checked} scaled values over 5 dataset shapes, {outside} out of range"))
}

// ---------------------------------------------------------------- 12

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"seed": 11, "runs": 2}"#;
    let mut bytes = Vec::new();
    for name in ["a", "b"] {
        let mut cfg = RunConfig::from_json(doc, dir.path()).unwrap();
        cfg.output_dir = dir.path().join(name);
        cmd_train(&cfg).unwrap();
        let read = |p: &Path| std::fs::read(cfg.output_dir.join(p)).unwrap();
        bytes.push([
            read(Path::new("run0_fold0/checkpoint.json")),
            read(Path::new("run1_fold0/checkpoint.json")),
            read(Path::new("summary.json")),
        ]);
    }
    let same = bytes[0] == bytes[1];
    outcome(same, format!("two runs × 2 jobs, checkpoints and summary byte-identical: {same}"))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 12] = [
        (1, "SWAP-test oracle", 10, swap_test_oracle),
        (2, "mixed-state expansion oracle", 10, mixed_state_expansion),
        (3, "partial trace brute force", 5, partial_trace_brute_force),
        (4, "gradient check", 120, gradient_check),
        (5, "MC reproduction", 600, mc_reproduction),
        (6, "parameter counts", 5, parameter_counts),
        (7, "noise robustness", 900, noise_robustness),
        (8, "Kraus completeness", 5, kraus_completeness),
        (9, "configuration ordering", 600, metric_ordering),
        (10, "Meyer-Wallach anchors", 5, meyer_wallach_anchors),
        (11, "scaling ranges", 5, scaling_ranges),
        (12, "determinism", 300, determinism),
    ];
    let only: Option<Vec<u32>> =
        std::env::var("QMSAN_ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let strict = std::env::var("QMSAN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");

    let mut failed = Vec::new();
    for (id, name, limit, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = result.pass && in_time;
        if !pass {
            failed.push(id);
        }
        let timing = if in_time { format!("{:.1}s", elapsed.as_secs_f64()) } else { format!("{:.1}s, over the {limit}s limit", elapsed.as_secs_f64()) };
        println!("{} {id:>2} {name}: {} ({timing})", if pass { "PASS" } else { "FAIL" }, result.detail);
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        if strict {
            std::process::exit(1);
        }
    }
}
