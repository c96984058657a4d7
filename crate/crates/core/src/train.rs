//! Mini-batch Adam training over a local dataset.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{AdamState, ModelParams};
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub local_epochs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.001,
            batch_size: 32,
            local_epochs: 1,
        }
    }
}

impl Hyperparams {
    /// A learning rate of exactly 0 is accepted; it freezes the model.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be a finite non-negative number, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.local_epochs == 0 {
            return Err(Error::Config("local_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<S> {
    pub params: ModelParams<S>,
    pub steps: usize,
    /// Mean of the per-batch training losses seen during the pass.
    pub mean_batch_loss: f64,
}

/// One local training pass: `local_epochs` epochs over `data`, reshuffled
/// each epoch from a ChaCha8 stream seeded with `shuffle_seed`, one Adam step
/// per batch (the final short batch is kept). The optimizer starts fresh.
pub fn train_local<S: Scalar>(
    params: &ModelParams<S>,
    data: &Dataset<S>,
    hyper: &Hyperparams,
    shuffle_seed: u64,
) -> Result<TrainOutcome<S>> {
    hyper.validate()?;
    if data.is_empty() {
        return Err(Error::structural(format!(
            "{}: no training data",
            data.name
        )));
    }
    let mut model = params.clone();
    let mut flat = model.flatten();
    let mut adam = AdamState::new(flat.len());
    let lr = S::of(hyper.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut steps = 0;
    let mut loss_sum = 0.0;

    for _ in 0..hyper.local_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(hyper.batch_size) {
            let examples = batch.iter().map(|&i| {
                let s = &data.samples[i];
                (s.features.as_slice(), s.label as usize)
            });
            let (grad, loss) = model.loss_and_gradient(examples)?;
            adam.step(flat.as_mut_slice(), grad.as_slice(), lr)?;
            model.load_flat(flat.as_slice())?;
            steps += 1;
            loss_sum += loss.to_f64_lossy();
        }
    }
    Ok(TrainOutcome {
        params: model,
        steps,
        mean_batch_loss: loss_sum / steps as f64,
    })
}

/// Centralized training as a sequence of `passes` local passes, pass `p`
/// shuffling with the same seed a lone client 0 would use in round `p`.
pub fn train_centralized<S: Scalar>(
    init: &ModelParams<S>,
    data: &Dataset<S>,
    hyper: &Hyperparams,
    passes: usize,
    master_seed: u64,
) -> Result<ModelParams<S>> {
    let mut model = init.clone();
    for pass in 1..=passes as u64 {
        model = train_local(
            &model,
            data,
            hyper,
            seed::client_round_seed(master_seed, pass, 0),
        )?
        .params;
    }
    Ok(model)
}
