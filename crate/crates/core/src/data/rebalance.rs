use rand::distr::{Distribution, Uniform};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schema::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RebalanceMode {
    /// Duplicate random minority samples until the classes are equal.
    #[default]
    Oversample,
    /// Drop random majority samples until the classes are equal.
    Undersample,
    None,
}

/// Equalizes class counts. Oversampling appends duplicates after the original
/// samples; undersampling keeps the survivors in their original order.
pub fn rebalance<S: Scalar>(d: &Dataset<S>, mode: RebalanceMode, seed: u64) -> Result<Dataset<S>> {
    let (neg, pos) = d.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::structural(format!(
            "{}: rebalancing needs both classes (negatives {neg}, positives {pos})",
            d.name
        )));
    }
    if neg == pos || mode == RebalanceMode::None {
        return Ok(d.clone());
    }
    let minority_label = if pos < neg { 1u8 } else { 0 };
    let (minority, majority): (Vec<usize>, Vec<usize>) =
        (0..d.len()).partition(|&i| d.samples[i].label == minority_label);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    match mode {
        RebalanceMode::Oversample => {
            let extra = majority.len() - minority.len();
            let pick = Uniform::new(0, minority.len()).expect("minority nonempty");
            let mut out = d.clone();
            out.samples.reserve(extra);
            for _ in 0..extra {
                out.samples
                    .push(d.samples[minority[pick.sample(&mut rng)]].clone());
            }
            Ok(out)
        }
        RebalanceMode::Undersample => {
            let mut keep = vec![false; d.len()];
            for &i in &minority {
                keep[i] = true;
            }
            for j in index::sample(&mut rng, majority.len(), minority.len()) {
                keep[majority[j]] = true;
            }
            let idx: Vec<usize> = (0..d.len()).filter(|&i| keep[i]).collect();
            Ok(d.subset(d.name.clone(), &idx))
        }
        RebalanceMode::None => unreachable!(),
    }
}
