use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::schema::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_TEST_FRACTION: f64 = 0.3;

/// Stratified split: each class contributes `round(fraction · class_size)`
/// samples to the test side (at least one, and never the whole class). Both
/// sides keep the original sample order.
pub fn split_train_test<S: Scalar>(
    d: &Dataset<S>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset<S>, Dataset<S>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::structural(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_mask = vec![false; d.len()];
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..d.len())
            .filter(|&i| d.samples[i].label == label)
            .collect();
        if idx.len() < 2 {
            return Err(Error::structural(format!(
                "{}: class {label} has {} sample(s); stratified split needs at least 2",
                d.name,
                idx.len()
            )));
        }
        let n_test = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1);
        idx.shuffle(&mut rng);
        for &i in &idx[..n_test] {
            test_mask[i] = true;
        }
    }
    let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| test_mask[i]);
    Ok((
        d.subset(format!("{}/train", d.name), &train_idx),
        d.subset(format!("{}/test", d.name), &test_idx),
    ))
}
