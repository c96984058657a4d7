use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::aggregate::ModelUpdate;
use super::topology::{ClientNode, FederationTopology};
use crate::error::{Error, Result};
use crate::nn::{Architecture, ModelParams, ParamVector};
use crate::scalar::Scalar;
use crate::seed;
use crate::train::train_local;

/// Local training on one client for one round. The shuffle seed is derived
/// from `(master_seed, round, client id)`.
pub fn client_update<S: Scalar>(
    client: &ClientNode<S>,
    global: &ParamVector<S>,
    round: u64,
    master_seed: u64,
) -> Result<ModelUpdate<S>> {
    let arch = Architecture::default();
    if global.len() != arch.param_count() {
        return Err(Error::structural(format!(
            "client {} received {} weights, expected {}",
            client.id,
            global.len(),
            arch.param_count()
        )));
    }
    let params = ModelParams::unflatten(&arch, global)?;
    let shuffle_seed = seed::client_round_seed(master_seed, round, client.id as u64);
    let outcome = train_local(&params, &client.local_data, &client.hyper, shuffle_seed)?;
    Ok(ModelUpdate {
        client_id: client.id,
        weights: outcome.params.flatten(),
        sample_count: client.local_data.len(),
    })
}

/// Picks `max(1, round(fraction · N))` clients uniformly without replacement.
/// Returned ids are ascending.
pub fn sample_clients<S: Scalar>(
    topology: &FederationTopology<S>,
    fraction: f64,
    round_seed: u64,
) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "client_fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let ids = topology.client_ids();
    let n = ids.len();
    let take = ((fraction * n as f64).round() as usize).clamp(1, n);
    if take == n {
        return Ok(ids);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(round_seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, n, take)
        .into_iter()
        .map(|i| ids[i])
        .collect();
    chosen.sort_unstable();
    Ok(chosen)
}
