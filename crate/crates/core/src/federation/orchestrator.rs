//! Round loop driven by the reducer.

use std::collections::BTreeMap;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::aggregate::{combiner_aggregate, reducer_reduce, ModelUpdate, ReducerMode};
use super::client::{client_update, sample_clients};
use super::topology::FederationTopology;
use crate::data::Dataset;
use crate::error::{Error, Result, ResultExt};
use crate::metrics::{evaluate_model, MetricReport};
use crate::nn::{checkpoint, Architecture, ModelParams, ParamVector};
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoundConfig {
    pub rounds: usize,
    pub client_fraction: f64,
    pub seed: u64,
    pub reducer_mode: ReducerMode,
    /// Train the sampled clients of a round on the rayon pool.
    pub parallel: bool,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            rounds: 100,
            client_fraction: 1.0,
            seed: 0,
            reducer_mode: ReducerMode::Plain,
            parallel: false,
        }
    }
}

/// Global-model metrics after one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    /// 1-based.
    pub round: usize,
    /// Leading 16 hex digits of the SHA-256 of the global weights in `.fwv` form.
    pub checksum: String,
    pub metrics: MetricReport,
    pub participants: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FederationOutcome<S> {
    pub logs: Vec<RoundLog>,
    pub final_weights: ParamVector<S>,
}

pub fn weights_checksum<S: Scalar>(w: &ParamVector<S>) -> String {
    let bytes = checkpoint::encode(w).expect("parameter vector fits .fwv");
    Sha256::digest(&bytes)[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs one federated round and returns the new global weights plus the
/// participating client ids.
pub fn run_round<S: Scalar>(
    topology: &FederationTopology<S>,
    config: &RoundConfig,
    global: &ParamVector<S>,
    round: u64,
) -> Result<(ParamVector<S>, Vec<usize>)> {
    let selected = sample_clients(
        topology,
        config.client_fraction,
        seed::sampling_seed(config.seed, round),
    )?;
    let train = |id: &usize| -> Result<ModelUpdate<S>> {
        let client = topology.client(*id).expect("sampled id exists");
        client_update(client, global, round, config.seed).context(|| format!("client {id}"))
    };
    let updates: Vec<ModelUpdate<S>> = if config.parallel {
        selected.par_iter().map(train).collect::<Result<_>>()?
    } else {
        selected.iter().map(train).collect::<Result<_>>()?
    };

    let mut by_combiner: BTreeMap<usize, Vec<ModelUpdate<S>>> = BTreeMap::new();
    for u in updates {
        let combiner = topology
            .client(u.client_id)
            .expect("known client")
            .combiner_id;
        by_combiner.entry(combiner).or_default().push(u);
    }
    let combiner_models = by_combiner
        .iter()
        .map(|(cid, ups)| combiner_aggregate(ups).context(|| format!("combiner {cid}")))
        .collect::<Result<Vec<_>>>()?;
    debug!(
        "round {round}: {} clients across {} combiners",
        selected.len(),
        combiner_models.len()
    );
    let next = reducer_reduce(&combiner_models, global, round, config.reducer_mode)?;
    Ok((next, selected))
}

/// Seeds the global model with `init_params(config.seed)`, then for every
/// round: sample clients, train locally, aggregate per combiner, reduce, and
/// evaluate the new global model on `test_set`.
pub fn run_federation<S: Scalar>(
    topology: &FederationTopology<S>,
    config: &RoundConfig,
    test_set: &Dataset<S>,
) -> Result<FederationOutcome<S>> {
    let init = ModelParams::<S>::init(&Architecture::default(), config.seed).flatten();
    run_federation_from(topology, config, test_set, init)
}

pub fn run_federation_from<S: Scalar>(
    topology: &FederationTopology<S>,
    config: &RoundConfig,
    test_set: &Dataset<S>,
    init: ParamVector<S>,
) -> Result<FederationOutcome<S>> {
    topology.validate()?;
    if config.rounds == 0 {
        return Err(Error::Config("rounds must be at least 1".into()));
    }
    if test_set.is_empty() {
        return Err(Error::structural("federation test set is empty"));
    }
    let mut global = init;
    let mut logs = Vec::with_capacity(config.rounds);
    for round in 1..=config.rounds {
        let (next, participants) = run_round(topology, config, &global, round as u64)
            .context(|| format!("round {round}"))?;
        global = next;
        let metrics =
            evaluate_model(&global, test_set).context(|| format!("round {round} evaluation"))?;
        info!(
            "round {round}: loss {:.5} accuracy {:.2}% kappa {:.3} auc {:.3}",
            metrics.mean_loss, metrics.accuracy_pct, metrics.kappa, metrics.roc_auc
        );
        logs.push(RoundLog {
            round,
            checksum: weights_checksum(&global),
            metrics,
            participants,
        });
    }
    Ok(FederationOutcome {
        logs,
        final_weights: global,
    })
}
