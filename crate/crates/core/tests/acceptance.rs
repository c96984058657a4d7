//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and fails
//! if any criterion that ran did not pass.
//!
//! Criteria 8 to 10 need the three published datasets. Point
//! `FEDSMELL_PUBLISHED_DATA` at a directory holding `pecorelli.csv`,
//! `fontana.csv` and `khalid.csv` to run them.

use std::io::Write;
use std::path::{Path, PathBuf};

use fedsmell_core::data::{Dataset, NormalizationStats};
use fedsmell_core::experiments::{
    emit_outputs, load_datasets, parse_config_str, run_cross_eval, run_experiment, run_federated,
    split_dataset, train_on, ExperimentConfig,
};
use fedsmell_core::federation::{
    combiner_aggregate, reducer_reduce, run_federation_from, weights_checksum, ClientNode,
    FederationTopology, ModelUpdate, ReducerMode, RoundConfig,
};
use fedsmell_core::metrics::{
    cohen_kappa, interpret_kappa, interpret_roc, roc_auc, ConfusionMatrix, ScoredPrediction,
};
use fedsmell_core::nn::{cross_entropy, Architecture, ModelParams, ParamVector};
use fedsmell_core::{train_centralized, Hyperparams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SEEDS: [u64; 3] = [1, 2, 3];

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

// ---------------------------------------------------------------------------
// 1. gradient oracle

/// Mean batch loss plus the sign pattern of every ReLU pre-activation.
fn loss_and_pattern(model: &ModelParams<f64>, batch: &[(Vec<f64>, usize)]) -> (f64, Vec<bool>) {
    let mut total = 0.0;
    let mut pattern = Vec::new();
    for (x, y) in batch {
        let (probs, cache) = model.forward(x).unwrap();
        total += cross_entropy(&probs, *y).unwrap();
        pattern.extend(cache.dense_pre.iter().flatten().map(|z| *z > 0.0));
    }
    (total / batch.len() as f64, pattern)
}

fn gradient_oracle() -> Outcome {
    const DELTA: f64 = 1e-5;
    const REL_TOL: f64 = 1e-4;
    const ABS_FLOOR: f64 = 1e-7;
    let arch = Architecture::default();
    let mut worst = 0.0_f64;
    let mut worst_abs = 0.0_f64;
    let mut failures = 0usize;
    let mut checked = 0usize;
    let mut kinks = 0usize;
    for seed in 0..5u64 {
        let model = ModelParams::init(&arch, 100 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch: Vec<(Vec<f64>, usize)> = (0..8)
            .map(|i| ((0..16).map(|_| rng.sample(StandardNormal)).collect(), i % 2))
            .collect();
        let analytic = model
            .backward(batch.iter().map(|(x, y)| (x.as_slice(), *y)))
            .unwrap();
        let mut probe = model.clone();
        let mut flat = model.flatten().0;
        for j in 0..flat.len() {
            let orig = flat[j];
            flat[j] = orig + DELTA;
            probe.load_flat(&flat).unwrap();
            let (up, up_pattern) = loss_and_pattern(&probe, &batch);
            flat[j] = orig - DELTA;
            probe.load_flat(&flat).unwrap();
            let (down, down_pattern) = loss_and_pattern(&probe, &batch);
            flat[j] = orig;
            // the stencil straddles a ReLU kink, where no derivative exists
            if up_pattern != down_pattern {
                kinks += 1;
                continue;
            }
            checked += 1;
            let numeric = (up - down) / (2.0 * DELTA);
            let a = analytic.0[j];
            let err = (a - numeric).abs();
            worst_abs = worst_abs.max(err);
            if err <= ABS_FLOOR {
                continue;
            }
            let rel = err / a.abs().max(numeric.abs());
            worst = worst.max(rel);
            if rel > REL_TOL {
                failures += 1;
            }
        }
    }
    verdict(
        failures == 0 && checked > 0,
        format!(
            "{checked} coordinates over 5 seeds ({kinks} skipped at ReLU kinks), worst relative error {worst:.2e} (floor {ABS_FLOOR:e}), worst absolute error {worst_abs:.2e}, {failures} above {REL_TOL:e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. aggregation oracle

fn aggregation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_comb = 0.0_f64;
    for _ in 0..100 {
        let k = rng.random_range(1..=8);
        let len = rng.random_range(1..=64);
        let mut updates: Vec<ModelUpdate<f64>> = (0..k)
            .map(|id| ModelUpdate {
                client_id: id,
                weights: ParamVector((0..len).map(|_| rng.random_range(-5.0..5.0)).collect()),
                sample_count: rng.random_range(1..=2000),
            })
            .collect();
        // arrival order must not matter
        updates.reverse();
        let got = combiner_aggregate(&updates).unwrap();
        let total: f64 = updates.iter().map(|u| u.sample_count as f64).sum();
        for j in 0..len {
            let mut want = 0.0;
            for u in &updates {
                want += u.sample_count as f64 * u.weights.0[j];
            }
            want /= total;
            worst_comb = worst_comb.max((got.0[j] - want).abs());
        }
    }

    let mut worst_red = 0.0_f64;
    for _ in 0..20 {
        let len = rng.random_range(1..=32);
        let m = rng.random_range(1..=4);
        let mut global = ParamVector(
            (0..len)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<f64>>(),
        );
        let mut scalar = global.0.clone();
        for t in 1..=25u64 {
            let models: Vec<ParamVector<f64>> = (0..m)
                .map(|_| ParamVector((0..len).map(|_| rng.random_range(-3.0..3.0)).collect()))
                .collect();
            global = reducer_reduce(&models, &global, t, ReducerMode::Smoothed).unwrap();
            for (j, s) in scalar.iter_mut().enumerate() {
                let mean = models.iter().map(|w| w.0[j]).sum::<f64>() / m as f64;
                *s += (mean - *s) / t as f64;
                worst_red = worst_red.max((global.0[j] - *s).abs());
            }
        }
    }
    verdict(
        worst_comb <= 1e-12 && worst_red <= 1e-12,
        format!("combiner max error {worst_comb:.1e} over 100 cases, smoothed reducer max error {worst_red:.1e}"),
    )
}

// ---------------------------------------------------------------------------
// 3. single-client equivalence

fn normalized_synth(seed: u64, n: usize) -> Dataset {
    let d = fedsmell_core::data::synth_generate(n, 0.2, &[0.0; 16], seed).unwrap();
    NormalizationStats::fit(&d).unwrap().apply(&d)
}

fn single_client_equivalence() -> Outcome {
    let data = normalized_synth(11, 300);
    let hyper = Hyperparams::default();
    let seed = 7;
    let topo = FederationTopology::new(
        vec![0],
        vec![ClientNode {
            id: 0,
            local_data: data.clone(),
            hyper,
            combiner_id: 0,
        }],
    )
    .unwrap();
    let cfg = RoundConfig {
        rounds: 10,
        seed,
        ..RoundConfig::default()
    };
    let init = ModelParams::init(&Architecture::default(), seed);
    let fed = run_federation_from(&topo, &cfg, &data, init.flatten()).unwrap();
    let mut mismatched = Vec::new();
    let mut central = init.clone();
    for (pass, log) in fed.logs.iter().enumerate() {
        // one more pass continues exactly where the previous ones stopped
        central = step_one_pass(&central, &data, &hyper, pass as u64 + 1, seed);
        if weights_checksum(&central.flatten()) != log.checksum {
            mismatched.push(log.round);
        }
    }
    let full = train_centralized(&init, &data, &hyper, 10, seed)
        .unwrap()
        .flatten();
    let bitwise = full
        .0
        .iter()
        .zip(&fed.final_weights.0)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    verdict(
        bitwise && mismatched.is_empty(),
        format!("10 rounds, final weights bitwise equal: {bitwise}, rounds with differing checksum: {mismatched:?}"),
    )
}

fn step_one_pass(
    model: &ModelParams<f64>,
    data: &Dataset,
    hyper: &Hyperparams,
    pass: u64,
    seed: u64,
) -> ModelParams<f64> {
    let shuffle = fedsmell_core::seed::client_round_seed(seed, pass, 0);
    fedsmell_core::train_local(model, data, hyper, shuffle)
        .unwrap()
        .params
}

// ---------------------------------------------------------------------------
// 4. metric oracles

fn kappa_oracle(cm: &ConfusionMatrix) -> f64 {
    // expand to explicit (predicted, actual) pairs and count
    let mut pairs = Vec::new();
    pairs.extend(std::iter::repeat_n((1, 1), cm.tp as usize));
    pairs.extend(std::iter::repeat_n((0, 0), cm.tn as usize));
    pairs.extend(std::iter::repeat_n((1, 0), cm.fp as usize));
    pairs.extend(std::iter::repeat_n((0, 1), cm.fn_ as usize));
    let n = pairs.len() as f64;
    let agree = pairs.iter().filter(|(p, a)| p == a).count() as f64 / n;
    let mut chance = 0.0;
    for class in [0, 1] {
        let pred = pairs.iter().filter(|(p, _)| *p == class).count() as f64 / n;
        let act = pairs.iter().filter(|(_, a)| *a == class).count() as f64 / n;
        chance += pred * act;
    }
    if chance == 1.0 {
        return if agree == 1.0 { 1.0 } else { 0.0 };
    }
    (agree - chance) / (1.0 - chance)
}

fn auc_pairs(preds: &[ScoredPrediction<f64>]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for p in preds.iter().filter(|p| p.label == 1) {
        for q in preds.iter().filter(|q| q.label == 0) {
            pairs += 1.0;
            if p.score > q.score {
                wins += 1.0;
            } else if p.score == q.score {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn auc_trapezoid(preds: &[ScoredPrediction<f64>]) -> f64 {
    let pos = preds.iter().filter(|p| p.label == 1).count() as f64;
    let neg = preds.len() as f64 - pos;
    let mut thresholds: Vec<f64> = preds.iter().map(|p| p.score).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let (mut fpr0, mut tpr0) = (0.0, 0.0);
    let mut area = 0.0;
    for t in thresholds {
        let tp = preds
            .iter()
            .filter(|p| p.label == 1 && p.score >= t)
            .count() as f64;
        let fp = preds
            .iter()
            .filter(|p| p.label == 0 && p.score >= t)
            .count() as f64;
        let (fpr, tpr) = (fp / neg, tp / pos);
        area += (fpr - fpr0) * (tpr + tpr0) / 2.0;
        fpr0 = fpr;
        tpr0 = tpr;
    }
    area
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_kappa = 0.0_f64;
    for case in 0..200 {
        let cm = if case < 4 {
            // degenerate marginals
            [
                ConfusionMatrix::new(7, 0, 0, 0),
                ConfusionMatrix::new(0, 9, 0, 0),
                ConfusionMatrix::new(0, 0, 5, 0),
                ConfusionMatrix::new(0, 6, 0, 3),
            ][case]
        } else {
            let mut draw = || rng.random_range(0..60u64);
            let cm = ConfusionMatrix::new(draw(), draw(), draw(), draw());
            if cm.total() == 0 {
                ConfusionMatrix::new(1, 0, 0, 0)
            } else {
                cm
            }
        };
        worst_kappa = worst_kappa.max((cohen_kappa(&cm).unwrap() - kappa_oracle(&cm)).abs());
    }

    let mut worst_auc = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=80);
        let levels = rng.random_range(2..=30);
        let mut preds: Vec<ScoredPrediction<f64>> = (0..n)
            .map(|_| ScoredPrediction {
                score: rng.random_range(0..levels) as f64 / levels as f64,
                label: rng.random_range(0..2u8),
            })
            .collect();
        preds[0].label = 0;
        preds[1].label = 1;
        let got = roc_auc(&preds).unwrap();
        worst_auc = worst_auc
            .max((got - auc_pairs(&preds)).abs())
            .max((got - auc_trapezoid(&preds)).abs());
    }

    let kappa_edges = [
        (0.20, "Poor"),
        (0.21, "Fair"),
        (0.40, "Fair"),
        (0.41, "Moderate"),
        (0.60, "Moderate"),
        (0.61, "Substantial"),
        (0.79, "Substantial"),
        (0.80, "Substantial"),
        (0.81, "Almost perfect"),
        (1.00, "Almost perfect"),
    ];
    let roc_edges = [
        (0.5, "Fail (≤0.5)"),
        (0.51, "Fail"),
        (0.6, "Fail"),
        (0.61, "Poor"),
        (0.7, "Poor"),
        (0.71, "Fair"),
        (0.8, "Fair"),
        (0.81, "Good"),
        (0.9, "Good"),
        (0.91, "Excellent"),
        (1.0, "Excellent"),
    ];
    let bad_bands: Vec<String> = kappa_edges
        .iter()
        .filter(|(k, b)| interpret_kappa(*k).unwrap().as_str() != *b)
        .map(|(k, _)| format!("kappa {k}"))
        .chain(
            roc_edges
                .iter()
                .filter(|(a, b)| interpret_roc(*a).unwrap().as_str() != *b)
                .map(|(a, _)| format!("roc {a}")),
        )
        .collect();
    verdict(
        worst_kappa <= 1e-12 && worst_auc <= 1e-12 && bad_bands.is_empty(),
        format!("kappa max error {worst_kappa:.1e}, roc_auc max error {worst_auc:.1e}, band mismatches {bad_bands:?}"),
    )
}

// ---------------------------------------------------------------------------
// 5 to 7. synthetic experiments

const CROSS_EVAL: &str = r#"
experiment = "cross_eval"

[train]
centralized_passes = 20

[[synth.datasets]]
name = "a"
n = 2000

[[synth.datasets]]
name = "shifted"
n = 2000
drift = 3.0

[[synth.datasets]]
name = "c"
n = 2000
"#;

const FEDERATED: &str = r#"
experiment = "federated"

[data]
chunks = [5, 1, 4]

[federation]
rounds = 30
combiners = 2
parallel = true

[[synth.datasets]]
name = "a"
n = 2000

[[synth.datasets]]
name = "b"
n = 600
drift = 1.5

[[synth.datasets]]
name = "c"
n = 1600
drift = -1.5
"#;

fn with_seed(text: &str, seed: u64) -> ExperimentConfig {
    let mut cfg = parse_config_str(text).unwrap();
    cfg.seed = seed;
    cfg
}

fn synthetic_shift() -> Outcome {
    let mut worst_drop = f64::INFINITY;
    let mut lines = Vec::new();
    for seed in SEEDS {
        let result = run_cross_eval(&with_seed(CROSS_EVAL, seed)).unwrap();
        for source in ["a", "c"] {
            let own = result
                .in_distribution
                .cell(source, source)
                .unwrap()
                .accuracy_pct;
            let cross = result.table.cell(source, "shifted").unwrap().accuracy_pct;
            worst_drop = worst_drop.min(own - cross);
            lines.push(format!("s{seed} {source}: {own:.1}->{cross:.1}"));
        }
    }
    verdict(
        worst_drop >= 10.0,
        format!(
            "smallest drop {worst_drop:.2} points (need >= 10) [{}]",
            lines.join(", ")
        ),
    )
}

fn federated_vs_centralized() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    let mut lines = Vec::new();
    for seed in SEEDS {
        let cfg = with_seed(FEDERATED, seed);
        let fed = run_federated(&cfg).unwrap();
        let fed_best = fed
            .round_logs
            .iter()
            .map(|l| l.metrics.accuracy_pct)
            .fold(f64::NEG_INFINITY, f64::max);

        let datasets = load_datasets(&cfg).unwrap();
        let splits: Vec<(Dataset, Dataset)> = datasets
            .iter()
            .enumerate()
            .map(|(i, d)| split_dataset(&cfg, i, d).unwrap())
            .collect();
        let pooled = Dataset::concat("pooled", splits.iter().map(|(_, t)| t));
        let best_central = splits
            .iter()
            .enumerate()
            .map(|(i, (train, _))| {
                train_on(&cfg, i, train)
                    .unwrap()
                    .evaluate_raw(&pooled)
                    .unwrap()
                    .accuracy_pct
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst_margin = worst_margin.min(fed_best - (best_central - 2.0));
        lines.push(format!(
            "s{seed} federated {fed_best:.2} vs centralized {best_central:.2}"
        ));
    }
    verdict(
        worst_margin >= 0.0,
        format!("10 clients, 30 rounds [{}]", lines.join(", ")),
    )
}

fn determinism() -> Outcome {
    let mut small = with_seed(FEDERATED, 5);
    small.federation.rounds = 3;
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let result = run_experiment(&small).unwrap();
        emit_outputs(&out, &small, &result, 0.0).unwrap();
        outputs.push(std::fs::read(out.join("rounds.csv")).unwrap());
    }
    verdict(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!(
            "rounds.csv {} bytes, identical: {}",
            outputs[0].len(),
            outputs[0] == outputs[1]
        ),
    )
}

// ---------------------------------------------------------------------------
// 8 to 10. published datasets

const PUBLISHED_NAMES: [&str; 3] = ["pecorelli", "fontana", "khalid"];

fn published_dir() -> Option<PathBuf> {
    let dir = PathBuf::from(std::env::var_os("FEDSMELL_PUBLISHED_DATA")?);
    PUBLISHED_NAMES
        .iter()
        .all(|n| dir.join(format!("{n}.csv")).is_file())
        .then_some(dir)
}

fn published_config(dir: &Path, experiment: &str) -> ExperimentConfig {
    let paths: Vec<String> = PUBLISHED_NAMES
        .iter()
        .map(|n| format!("{:?}", dir.join(format!("{n}.csv")).display().to_string()))
        .collect();
    let names: Vec<String> = PUBLISHED_NAMES.iter().map(|n| format!("{n:?}")).collect();
    let text = format!(
        "experiment = {experiment:?}\nseed = 1\n[data]\npaths = [{}]\nnames = [{}]\nchunks = [5, 1, 4]\n[federation]\nrounds = 100\ncombiners = 2\nparallel = true\n",
        paths.join(", "),
        names.join(", ")
    );
    parse_config_str(&text).unwrap()
}

fn published_centralized(dir: &Path) -> Outcome {
    let result = run_experiment(&published_config(dir, "centralized")).unwrap();
    let targets = [("pecorelli", 98.90), ("fontana", 92.30), ("khalid", 99.15)];
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, want) in targets {
        let got = result.table.cell(name, name).unwrap().accuracy_pct;
        ok &= (got - want).abs() <= 3.0;
        lines.push(format!("{name} {got:.2} (target {want:.2} +/- 3)"));
    }
    verdict(ok, lines.join(", "))
}

fn published_cross_eval(dir: &Path) -> Outcome {
    let result = run_cross_eval(&published_config(dir, "cross_eval")).unwrap();
    // published cells, highest first
    let published = [
        ("khalid", "pecorelli", 97.00),
        ("pecorelli", "khalid", 96.30),
        ("fontana", "khalid", 80.00),
        ("fontana", "pecorelli", 79.00),
        ("khalid", "fontana", 71.00),
        ("pecorelli", "fontana", 63.80),
    ];
    let got: Vec<f64> = published
        .iter()
        .map(|(t, e, _)| result.table.cell(t, e).unwrap().accuracy_pct)
        .collect();
    let ordered = got.windows(2).all(|w| w[0] >= w[1]);
    let fontana_max = got[2..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let close_min = got[0].min(got[1]);
    let gap = close_min - fontana_max;
    let cells: Vec<String> = published
        .iter()
        .zip(&got)
        .map(|((t, e, p), g)| format!("{t}->{e} {g:.2} (published {p:.2})"))
        .collect();
    verdict(
        ordered && gap >= 10.0,
        format!(
            "ordering preserved: {ordered}, gap {gap:.2} points (need >= 10) [{}]",
            cells.join(", ")
        ),
    )
}

fn published_federated(dir: &Path) -> Outcome {
    let result = run_experiment(&published_config(dir, "federated")).unwrap();
    let last = result.final_report.unwrap();
    let band = interpret_kappa(last.kappa).unwrap();
    let ok = last.accuracy_pct >= 96.0 && band >= fedsmell_core::metrics::KappaBand::Substantial;
    verdict(
        ok,
        format!(
            "final accuracy {:.2} (need >= 96), kappa {:.3} ({band})",
            last.accuracy_pct, last.kappa
        ),
    )
}

// ---------------------------------------------------------------------------

#[test]
fn acceptance() {
    let published = published_dir();
    let skip = || Outcome::Skip("FEDSMELL_PUBLISHED_DATA not set or incomplete".into());
    let criteria: Vec<(&str, Check)> = vec![
        ("gradient oracle", Box::new(gradient_oracle)),
        ("aggregation oracle", Box::new(aggregation_oracle)),
        (
            "single-client equivalence",
            Box::new(single_client_equivalence),
        ),
        ("metric oracles", Box::new(metric_oracles)),
        ("synthetic domain shift", Box::new(synthetic_shift)),
        ("synthetic federation", Box::new(federated_vs_centralized)),
        ("determinism", Box::new(determinism)),
        (
            "published centralized accuracies",
            Box::new(|| {
                published
                    .as_deref()
                    .map_or_else(skip, published_centralized)
            }),
        ),
        (
            "published cross-evaluation ordering",
            Box::new(|| published.as_deref().map_or_else(skip, published_cross_eval)),
        ),
        (
            "published federated run",
            Box::new(|| published.as_deref().map_or_else(skip, published_federated)),
        ),
    ];

    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => ("FAIL", d),
            Outcome::Skip(d) => ("SKIP", d),
        };
        // written to the raw handle so the verdicts show up even when output is captured
        writeln!(
            std::io::stderr(),
            "[{tag}] {:>2}. {name}: {detail} ({secs:.1}s)",
            i + 1
        )
        .unwrap();
        if matches!(outcome, Outcome::Fail(_)) {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
