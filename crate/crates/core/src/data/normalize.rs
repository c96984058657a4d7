use serde::{Deserialize, Serialize};

use super::schema::{Dataset, NUM_FEATURES};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-feature z-score parameters. Constant features carry `std = 1`, so they
/// normalize to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats<S = f64> {
    pub mean: Vec<S>,
    pub std: Vec<S>,
}

impl<S: Scalar> NormalizationStats<S> {
    /// Population mean and standard deviation of each feature.
    pub fn fit(train: &Dataset<S>) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::structural(
                "cannot fit normalizer on an empty dataset",
            ));
        }
        let n = S::of(train.len() as f64);
        let mut mean = vec![S::zero(); NUM_FEATURES];
        for s in &train.samples {
            for (m, &v) in mean.iter_mut().zip(&s.features) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);

        let mut var = vec![S::zero(); NUM_FEATURES];
        for s in &train.samples {
            for ((acc, &v), &m) in var.iter_mut().zip(&s.features).zip(&mean) {
                let d = v - m;
                *acc += d * d;
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd > S::zero() && sd.is_finite() {
                    sd
                } else {
                    S::one()
                }
            })
            .collect();
        Ok(NormalizationStats { mean, std })
    }

    pub fn apply(&self, d: &Dataset<S>) -> Dataset<S> {
        let mut out = d.clone();
        for s in &mut out.samples {
            for ((v, &m), &sd) in s.features.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / sd;
            }
        }
        out
    }

    pub fn invert(&self, d: &Dataset<S>) -> Dataset<S> {
        let mut out = d.clone();
        for s in &mut out.samples {
            for ((v, &m), &sd) in s.features.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = *v * sd + m;
            }
        }
        out
    }
}

pub fn fit_normalizer<S: Scalar>(train: &Dataset<S>) -> Result<NormalizationStats<S>> {
    NormalizationStats::fit(train)
}

pub fn apply_normalizer<S: Scalar>(d: &Dataset<S>, stats: &NormalizationStats<S>) -> Dataset<S> {
    stats.apply(d)
}
