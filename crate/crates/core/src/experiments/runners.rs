//! Centralized, cross-evaluation, federated and data-generation experiments.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::data::{
    load_csv, partition_chunks, rebalance, split_train_test, synth_generate, Dataset,
    FeatureSchema, NormalizationStats, PartitionPlan, RebalanceMode,
};
use crate::error::{Error, Result, ResultExt};
use crate::federation::{run_federation, FederationTopology, RoundLog};
use crate::metrics::{evaluate_params, MetricReport};
use crate::nn::{Architecture, ModelParams, ParamVector};
use crate::seed::derive;
use crate::train::train_centralized;

// Stream tags keep the seeds of different pipeline stages apart.
const TAG_SPLIT: u64 = 1;
const TAG_REBALANCE: u64 = 2;
const TAG_PARTITION: u64 = 3;
const TAG_SYNTH: u64 = 4;

/// A model together with the normalization it was trained under. Any data it
/// scores is transformed with these statistics, never refitted.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub source: String,
    pub stats: NormalizationStats,
    pub params: ModelParams<f64>,
}

impl TrainedModel {
    pub fn evaluate_raw(&self, raw: &Dataset) -> Result<MetricReport> {
        evaluate_params(&self.params, &self.stats.apply(raw))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub train_source: String,
    pub eval_source: String,
    pub accuracy_pct: f64,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn cell(&self, train: &str, eval: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.train_source == train && r.eval_source == eval)
    }
}

/// Everything an experiment produced, ready for [`super::emit_outputs`].
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    pub table: SummaryTable,
    /// Same-dataset cells that accompany a cross-evaluation.
    pub in_distribution: SummaryTable,
    pub round_logs: Vec<RoundLog>,
    pub final_report: Option<MetricReport>,
    pub checkpoints: Vec<(String, ParamVector<f64>)>,
    pub partitions: Vec<PartitionPlan>,
    pub generated: Vec<Dataset>,
}

impl ExperimentResult {
    fn new(experiment: ExperimentKind) -> Self {
        ExperimentResult {
            experiment,
            table: SummaryTable::default(),
            in_distribution: SummaryTable::default(),
            round_logs: Vec::new(),
            final_report: None,
            checkpoints: Vec::new(),
            partitions: Vec::new(),
            generated: Vec::new(),
        }
    }
}

/// Loads CSV datasets, then generates the synthetic ones, applying configured names.
pub fn load_datasets(cfg: &ExperimentConfig) -> Result<Vec<Dataset>> {
    let names = cfg.dataset_names();
    let schema = FeatureSchema::default();
    let mut out = Vec::with_capacity(cfg.dataset_count());
    for path in &cfg.data.paths {
        out.push(load_csv(path, &schema).context(|| format!("dataset {}", path.display()))?);
    }
    for (i, spec) in cfg.synth.datasets.iter().enumerate() {
        let seed = spec
            .seed
            .unwrap_or_else(|| derive(&[cfg.seed, TAG_SYNTH, i as u64]));
        let d = synth_generate(spec.n, spec.positive_rate, &spec.total_shift()?, seed)
            .context(|| format!("synthetic dataset {}", spec.name))?;
        out.push(d);
    }
    for (d, name) in out.iter_mut().zip(names) {
        d.name = name;
    }
    Ok(out)
}

fn rebalance_or_keep(d: &Dataset, mode: RebalanceMode, seed: u64) -> Dataset {
    if mode == RebalanceMode::None {
        return d.clone();
    }
    match rebalance(d, mode, seed) {
        Ok(r) => r,
        Err(e) => {
            warn!("{}: keeping class ratio as is ({e})", d.name);
            d.clone()
        }
    }
}

/// Stratified split of dataset `index`; returns `(train, test)`.
pub fn split_dataset(
    cfg: &ExperimentConfig,
    index: usize,
    d: &Dataset,
) -> Result<(Dataset, Dataset)> {
    split_train_test(
        d,
        cfg.data.test_fraction,
        derive(&[cfg.seed, TAG_SPLIT, index as u64]),
    )
    .context(|| format!("dataset {}", d.name))
}

fn rebalance_seed(cfg: &ExperimentConfig, index: usize, chunk: usize) -> u64 {
    derive(&[cfg.seed, TAG_REBALANCE, index as u64, chunk as u64])
}

fn centralized_passes(cfg: &ExperimentConfig) -> usize {
    cfg.train
        .centralized_passes
        .unwrap_or(cfg.federation.rounds * cfg.train.local_epochs)
}

/// Rebalances and normalizes a training split, then trains the detector on it.
pub fn train_on(cfg: &ExperimentConfig, index: usize, train: &Dataset) -> Result<TrainedModel> {
    let balanced = rebalance_or_keep(train, cfg.data.rebalance, rebalance_seed(cfg, index, 0));
    let stats = NormalizationStats::fit(&balanced)?;
    let init = ModelParams::init(&Architecture::default(), cfg.seed);
    let params = train_centralized(
        &init,
        &stats.apply(&balanced),
        &cfg.hyperparams(),
        centralized_passes(cfg),
        cfg.seed,
    )
    .context(|| format!("training on {}", train.name))?;
    Ok(TrainedModel {
        source: train.name.clone(),
        stats,
        params,
    })
}

fn base_name(d: &Dataset) -> String {
    d.name
        .trim_end_matches("/train")
        .trim_end_matches("/test")
        .to_string()
}

/// Trains one model per dataset and reports its held-out accuracy.
pub fn run_centralized(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let datasets = load_datasets(cfg)?;
    let mut result = ExperimentResult::new(ExperimentKind::Centralized);
    for (i, d) in datasets.iter().enumerate() {
        let (train, test) = split_dataset(cfg, i, d)?;
        let model = train_on(cfg, i, &train)?;
        let metrics = model
            .evaluate_raw(&test)
            .context(|| format!("evaluating {}", d.name))?;
        info!("centralized {}: {:.2}%", d.name, metrics.accuracy_pct);
        result.table.rows.push(SummaryRow {
            train_source: d.name.clone(),
            eval_source: d.name.clone(),
            accuracy_pct: metrics.accuracy_pct,
            metrics,
        });
        result
            .checkpoints
            .push((d.name.clone(), model.params.flatten()));
    }
    Ok(result)
}

/// Trains on each dataset and scores the model on the other datasets' test
/// splits, normalized with the training dataset's statistics.
pub fn run_cross_eval(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let datasets = load_datasets(cfg)?;
    let splits = datasets
        .iter()
        .enumerate()
        .map(|(i, d)| split_dataset(cfg, i, d))
        .collect::<Result<Vec<_>>>()?;
    let models = splits
        .iter()
        .enumerate()
        .map(|(i, (train, _))| train_on(cfg, i, train))
        .collect::<Result<Vec<_>>>()?;

    let mut result = ExperimentResult::new(ExperimentKind::CrossEval);
    for (i, model) in models.iter().enumerate() {
        let train_name = base_name(&splits[i].0);
        for (j, (_, test)) in splits.iter().enumerate() {
            let metrics = model
                .evaluate_raw(test)
                .context(|| format!("evaluating {train_name} on {}", test.name))?;
            let row = SummaryRow {
                train_source: train_name.clone(),
                eval_source: base_name(test),
                accuracy_pct: metrics.accuracy_pct,
                metrics,
            };
            info!(
                "cross-eval {} -> {}: {:.2}%",
                row.train_source, row.eval_source, row.accuracy_pct
            );
            if i == j {
                result.in_distribution.rows.push(row);
            } else {
                result.table.rows.push(row);
            }
        }
        result
            .checkpoints
            .push((train_name, model.params.flatten()));
    }
    Ok(result)
}

/// Builds client datasets from the configured chunking, runs the federation
/// and evaluates every round on the pooled test splits.
pub fn run_federated(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let datasets = load_datasets(cfg)?;
    let chunks = cfg
        .data
        .chunks
        .clone()
        .unwrap_or_else(|| super::config::default_chunks(datasets.len()));
    if chunks.len() != datasets.len() {
        return Err(Error::Config(format!(
            "data.chunks has {} entries for {} datasets",
            chunks.len(),
            datasets.len()
        )));
    }
    let mut result = ExperimentResult::new(ExperimentKind::Federated);
    let mut client_data = Vec::new();
    let mut tests = Vec::new();
    for (i, d) in datasets.iter().enumerate() {
        let (train, test) = split_dataset(cfg, i, d)?;
        let plan = partition_chunks(
            &train,
            chunks[i],
            derive(&[cfg.seed, TAG_PARTITION, i as u64]),
        )
        .context(|| format!("partitioning {}", d.name))?;
        for (c, chunk) in plan.materialize(&train)?.into_iter().enumerate() {
            let mut local =
                rebalance_or_keep(&chunk, cfg.data.rebalance, rebalance_seed(cfg, i, c));
            local.name = format!("{}#{c}", d.name);
            client_data.push(local);
        }
        result.partitions.push(plan);
        tests.push(test);
    }

    // One normalizer for the whole federation, equal to the pooled statistics
    // of the clients' training data.
    let stats = NormalizationStats::fit(&Dataset::concat("clients", &client_data))?;
    let client_data: Vec<Dataset> = client_data.iter().map(|d| stats.apply(d)).collect();
    let pooled_test = stats.apply(&Dataset::concat("pooled-test", &tests));

    let assignment = cfg.federation.assignment.clone().unwrap_or_else(|| {
        crate::federation::default_assignment(client_data.len(), cfg.federation.combiners)
    });
    let topology =
        FederationTopology::from_assignment(client_data, &assignment, cfg.hyperparams())?;
    let outcome = run_federation(&topology, &cfg.round_config(), &pooled_test)?;

    let final_model = ModelParams::unflatten(&Architecture::default(), &outcome.final_weights)?;
    for test in &tests {
        let metrics = evaluate_params(&final_model, &stats.apply(test))
            .context(|| format!("evaluating {}", test.name))?;
        result.table.rows.push(SummaryRow {
            train_source: "federation".into(),
            eval_source: base_name(test),
            accuracy_pct: metrics.accuracy_pct,
            metrics,
        });
    }
    result.final_report = outcome.logs.last().map(|l| l.metrics.clone());
    result.round_logs = outcome.logs;
    result
        .checkpoints
        .push(("global".into(), outcome.final_weights));
    Ok(result)
}

/// Generates the configured synthetic datasets.
pub fn run_synth(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let mut scratch = cfg.clone();
    scratch.data.paths.clear();
    let n_synth = scratch.synth.datasets.len();
    if let Some(names) = &cfg.data.names {
        scratch.data.names = Some(names[names.len() - n_synth..].to_vec());
    }
    let mut result = ExperimentResult::new(ExperimentKind::Synth);
    result.generated = load_datasets(&scratch)?;
    Ok(result)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match cfg.experiment {
        ExperimentKind::Centralized => run_centralized(cfg),
        ExperimentKind::CrossEval => run_cross_eval(cfg),
        ExperimentKind::Federated => run_federated(cfg),
        ExperimentKind::Synth => run_synth(cfg),
    }
}
