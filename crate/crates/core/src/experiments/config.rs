//! Experiment configuration. Config files are TOML (flat keys plus
//! `[section]` tables); the resolved config is echoed as JSON, which
//! [`parse_config`] accepts as well.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::synth::separation_direction;
use crate::data::{RebalanceMode, DEFAULT_TEST_FRACTION, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::federation::{default_assignment, ReducerMode, RoundConfig};
use crate::train::Hyperparams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Centralized,
    CrossEval,
    Federated,
    Synth,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Centralized => "centralized",
            ExperimentKind::CrossEval => "cross_eval",
            ExperimentKind::Federated => "federated",
            ExperimentKind::Synth => "synth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub federation: FederationSection,
    #[serde(default)]
    pub synth: SynthSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// CSV files, up to three.
    pub paths: Vec<PathBuf>,
    /// Display names; defaults to file stems.
    pub names: Option<Vec<String>>,
    pub test_fraction: f64,
    pub rebalance: RebalanceMode,
    /// Client chunks per dataset (federated only).
    pub chunks: Option<Vec<usize>>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            paths: Vec::new(),
            names: None,
            test_fraction: DEFAULT_TEST_FRACTION,
            rebalance: RebalanceMode::default(),
            chunks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub local_epochs: usize,
    /// Passes over the data for centralized training; defaults to
    /// `rounds × local_epochs` so centralized and federated budgets match.
    pub centralized_passes: Option<usize>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let h = Hyperparams::default();
        TrainSection {
            learning_rate: h.learning_rate,
            batch_size: h.batch_size,
            local_epochs: h.local_epochs,
            centralized_passes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FederationSection {
    pub rounds: usize,
    pub client_fraction: f64,
    pub reducer_mode: ReducerMode,
    pub combiners: usize,
    /// Combiner of each client, in client order.
    pub assignment: Option<Vec<usize>>,
    pub parallel: bool,
}

impl Default for FederationSection {
    fn default() -> Self {
        let r = RoundConfig::default();
        FederationSection {
            rounds: r.rounds,
            client_fraction: r.client_fraction,
            reducer_mode: r.reducer_mode,
            combiners: 2,
            assignment: None,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub datasets: Vec<SynthDatasetSpec>,
}

/// One generated dataset. `drift` moves the whole distribution along the
/// class-separation direction; `shift` is an arbitrary per-metric offset.
/// Both are in per-metric standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthDatasetSpec {
    pub name: String,
    pub n: usize,
    #[serde(default = "default_positive_rate")]
    pub positive_rate: f64,
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
    /// Generator seed; defaults to a value derived from the master seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_positive_rate() -> f64 {
    0.1
}

impl SynthDatasetSpec {
    /// Total latent translation (`shift + drift · direction`).
    pub fn total_shift(&self) -> Result<[f64; NUM_FEATURES]> {
        let base = match &self.shift {
            None => [0.0; NUM_FEATURES],
            Some(v) if v.len() == NUM_FEATURES => std::array::from_fn(|k| v[k]),
            Some(v) => {
                return Err(Error::Config(format!(
                    "synth dataset `{}`: shift needs {NUM_FEATURES} entries, got {}",
                    self.name,
                    v.len()
                )))
            }
        };
        let dir = separation_direction();
        Ok(std::array::from_fn(|k| base[k] + self.drift * dir[k]))
    }
}

impl ExperimentConfig {
    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            learning_rate: self.train.learning_rate,
            batch_size: self.train.batch_size,
            local_epochs: self.train.local_epochs,
        }
    }

    pub fn round_config(&self) -> RoundConfig {
        RoundConfig {
            rounds: self.federation.rounds,
            client_fraction: self.federation.client_fraction,
            seed: self.seed,
            reducer_mode: self.federation.reducer_mode,
            parallel: self.federation.parallel,
        }
    }

    /// Number of datasets, from files then synthetic specs.
    pub fn dataset_count(&self) -> usize {
        self.data.paths.len() + self.synth.datasets.len()
    }

    pub fn dataset_names(&self) -> Vec<String> {
        if let Some(names) = &self.data.names {
            return names.clone();
        }
        self.data
            .paths
            .iter()
            .map(|p| {
                p.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string())
            })
            .chain(self.synth.datasets.iter().map(|s| s.name.clone()))
            .collect()
    }

    /// Fills every optional field with the value the run will use and checks
    /// cross-field constraints.
    pub fn resolve(mut self) -> Result<Self> {
        let n_data = self.dataset_count();
        if self.data.names.is_none() {
            self.data.names = Some(self.dataset_names());
        }
        if self.train.centralized_passes.is_none() {
            self.train.centralized_passes = Some(self.federation.rounds * self.train.local_epochs);
        }
        if self.data.chunks.is_none() {
            self.data.chunks = Some(default_chunks(n_data));
        }
        let total_clients: usize = self
            .data
            .chunks
            .as_ref()
            .map(|c| c.iter().sum())
            .unwrap_or(0);
        if self.federation.assignment.is_none() {
            self.federation.assignment =
                Some(default_assignment(total_clients, self.federation.combiners));
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n_data = self.dataset_count();
        let cfg = |m: String| Err(Error::Config(m));
        if self.data.paths.len() > 3 {
            return cfg(format!(
                "at most 3 dataset paths, got {}",
                self.data.paths.len()
            ));
        }
        match self.experiment {
            ExperimentKind::Centralized | ExperimentKind::Federated if n_data == 0 => {
                return cfg(
                    "`data.paths` or `synth.datasets` must name at least one dataset".into(),
                )
            }
            ExperimentKind::CrossEval if n_data != 3 => {
                return cfg(format!("cross_eval needs exactly 3 datasets, got {n_data}"))
            }
            ExperimentKind::Synth if self.synth.datasets.is_empty() => {
                return cfg("synth experiment needs `synth.datasets`".into())
            }
            _ => {}
        }
        if let Some(names) = &self.data.names {
            if names.len() != n_data {
                return cfg(format!(
                    "{} dataset names for {n_data} datasets",
                    names.len()
                ));
            }
        }
        if !(self.data.test_fraction > 0.0 && self.data.test_fraction < 1.0) {
            return cfg(format!(
                "data.test_fraction must lie in (0, 1), got {}",
                self.data.test_fraction
            ));
        }
        self.hyperparams().validate()?;
        if self.federation.rounds == 0 {
            return cfg("federation.rounds must be at least 1".into());
        }
        if !(self.federation.client_fraction > 0.0 && self.federation.client_fraction <= 1.0) {
            return cfg(format!(
                "federation.client_fraction must lie in (0, 1], got {}",
                self.federation.client_fraction
            ));
        }
        if self.federation.combiners == 0 {
            return cfg("federation.combiners must be at least 1".into());
        }
        if self.experiment == ExperimentKind::Federated {
            let chunks = self
                .data
                .chunks
                .clone()
                .unwrap_or_else(|| default_chunks(n_data));
            if chunks.len() != n_data {
                return cfg(format!(
                    "data.chunks has {} entries for {n_data} datasets",
                    chunks.len()
                ));
            }
            if chunks.contains(&0) {
                return cfg("data.chunks entries must be at least 1".into());
            }
            let clients: usize = chunks.iter().sum();
            if let Some(a) = &self.federation.assignment {
                if a.len() != clients {
                    return cfg(format!(
                        "federation.assignment has {} entries for {clients} clients",
                        a.len()
                    ));
                }
                if let Some(bad) = a.iter().find(|&&c| c >= self.federation.combiners) {
                    return cfg(format!(
                        "federation.assignment references combiner {bad} but only {} exist",
                        self.federation.combiners
                    ));
                }
            }
        }
        for s in &self.synth.datasets {
            s.total_shift()?;
            if s.n < 10 || !(s.positive_rate > 0.0 && s.positive_rate < 1.0) {
                return cfg(format!(
                    "synth dataset `{}` needs n >= 10 and 0 < positive_rate < 1",
                    s.name
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Three datasets split 5 / 1 / 4 into ten clients; otherwise one client per
/// dataset.
pub fn default_chunks(n_datasets: usize) -> Vec<usize> {
    if n_datasets == 3 {
        vec![5, 1, 4]
    } else {
        vec![1; n_datasets]
    }
}

/// Parses TOML text into a resolved config.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let raw: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(one_line(&e.to_string())))?;
    raw.resolve()
}

/// Parses a `.json` (e.g. a previous `config.resolved.json`) or TOML file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let raw: ExperimentConfig = if is_json {
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: {}", path.display(), one_line(&e.to_string())))
        })?
    };
    raw.resolve()
}

// toml renders a multi-line source snippet; keep only the message lines.
fn one_line(msg: &str) -> String {
    let is_snippet = |l: &str| match l.split_once('|') {
        Some((gutter, _)) => gutter.trim().chars().all(|c| c.is_ascii_digit()),
        None => false,
    };
    msg.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !is_snippet(l))
        .collect::<Vec<_>>()
        .join(" ")
}
