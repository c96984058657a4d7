//! FedAvg arithmetic: sample-weighted means at the combiners and the
//! reducer's combination of combiner models.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ParamVector;
use crate::scalar::Scalar;

/// A client's trained weights and the number of samples behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelUpdate<S = f64> {
    pub client_id: usize,
    pub weights: ParamVector<S>,
    pub sample_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReducerMode {
    /// Unweighted mean of the combiner models.
    #[default]
    Plain,
    /// Streaming average: `prev + (mean - prev) / t`.
    Smoothed,
}

/// Exact FedAvg coefficients `n_k / n`. They sum to one exactly.
pub fn aggregation_weights(sample_counts: &[usize]) -> Result<Vec<Ratio<u64>>> {
    let total: u64 = sample_counts.iter().map(|&n| n as u64).sum();
    if total == 0 {
        return Err(Error::structural("aggregation over zero samples"));
    }
    Ok(sample_counts
        .iter()
        .map(|&n| Ratio::new(n as u64, total))
        .collect())
}

fn ratio_to<S: Scalar>(r: &Ratio<u64>) -> S {
    S::of(*r.numer() as f64) / S::of(*r.denom() as f64)
}

fn check_lengths<S: Scalar>(vectors: &[&ParamVector<S>]) -> Result<usize> {
    let len = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != len) {
        return Err(Error::structural(format!(
            "weight vectors disagree in length ({} vs {})",
            len,
            bad.len()
        )));
    }
    Ok(len)
}

/// `Σ_k (n_k / n) · W_k`, accumulated in ascending `client_id` order so the
/// result does not depend on arrival order.
pub fn combiner_aggregate<S: Scalar>(updates: &[ModelUpdate<S>]) -> Result<ParamVector<S>> {
    if updates.is_empty() {
        return Err(Error::structural("combiner received no updates"));
    }
    let mut sorted: Vec<&ModelUpdate<S>> = updates.iter().collect();
    sorted.sort_by_key(|u| u.client_id);
    if sorted.iter().any(|u| u.sample_count == 0) {
        return Err(Error::structural("update with zero samples"));
    }
    let len = check_lengths(&sorted.iter().map(|u| &u.weights).collect::<Vec<_>>())?;
    let weights = aggregation_weights(&sorted.iter().map(|u| u.sample_count).collect::<Vec<_>>())?;

    let mut out = vec![S::zero(); len];
    let mut lo = sorted[0].weights.0.clone();
    let mut hi = lo.clone();
    for (u, w) in sorted.iter().zip(&weights) {
        let w: S = ratio_to(w);
        for (j, (acc, &v)) in out.iter_mut().zip(u.weights.as_slice()).enumerate() {
            *acc += w * v;
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    // The exact weighted mean is a convex combination; clamping removes only
    // floating-point rounding that would step outside the input range.
    for ((acc, &l), &h) in out.iter_mut().zip(&lo).zip(&hi) {
        *acc = acc.max(l).min(h);
    }
    Ok(ParamVector(out))
}

/// Combines the round's combiner models into the next global model.
pub fn reducer_reduce<S: Scalar>(
    combiner_models: &[ParamVector<S>],
    prev_global: &ParamVector<S>,
    t: u64,
    mode: ReducerMode,
) -> Result<ParamVector<S>> {
    if combiner_models.is_empty() {
        return Err(Error::structural("reducer received no combiner models"));
    }
    if t == 0 {
        return Err(Error::structural("round index must start at 1"));
    }
    let mut all: Vec<&ParamVector<S>> = combiner_models.iter().collect();
    all.push(prev_global);
    let len = check_lengths(&all)?;

    let m = S::of(combiner_models.len() as f64);
    let mut mean = vec![S::zero(); len];
    for model in combiner_models {
        for (acc, &v) in mean.iter_mut().zip(model.as_slice()) {
            *acc += v;
        }
    }
    if combiner_models.len() > 1 {
        mean.iter_mut().for_each(|v| *v /= m);
    }
    match mode {
        ReducerMode::Plain => Ok(ParamVector(mean)),
        ReducerMode::Smoothed => {
            let t = S::of(t as f64);
            Ok(ParamVector(
                prev_global
                    .as_slice()
                    .iter()
                    .zip(&mean)
                    .map(|(&prev, &target)| prev + (target - prev) / t)
                    .collect(),
            ))
        }
    }
}
