//! Synthetic stand-in for the metric datasets: two Gaussian clusters in the
//! 16-metric space, optionally translated to mimic a different coding culture.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::schema::{Dataset, Sample, NUM_FEATURES};
use crate::error::{Error, Result};

/// Distance between class centres, in latent standard deviations.
pub const SEPARATION: f64 = 4.0;

// Per-metric location and spread, loosely shaped like real class-level metrics.
const OFFSET: [f64; NUM_FEATURES] = [
    400.0, 300.0, 80.0, 160.0, 0.3, 10.0, 2.0, 8.0, 6.0, 50.0, 40.0, 2.0, 1.0, 0.5, 100.0, 10.0,
];
const SCALE: [f64; NUM_FEATURES] = [
    200.0, 150.0, 40.0, 80.0, 0.2, 5.0, 1.0, 4.0, 3.0, 30.0, 25.0, 1.2, 2.0, 0.3, 50.0, 6.0,
];
// God classes are mostly larger, more complex and less cohesive.
const DIRECTION: [f64; NUM_FEATURES] = [
    1.0, 1.0, 0.5, 1.0, 0.1, 0.3, 0.1, 0.3, 0.2, 1.0, 1.0, 0.2, 0.2, 0.3, 1.0, 1.0,
];

/// Unit vector along which the positive cluster is displaced.
pub fn separation_direction() -> [f64; NUM_FEATURES] {
    let norm = DIRECTION.iter().map(|v| v * v).sum::<f64>().sqrt();
    DIRECTION.map(|v| v / norm)
}

/// A unit vector orthogonal to [`separation_direction`]; shifting along it
/// changes the feature distribution without moving the class boundary.
pub fn orthogonal_direction() -> [f64; NUM_FEATURES] {
    let d = separation_direction();
    let mut u: [f64; NUM_FEATURES] = std::array::from_fn(|k| if k % 2 == 0 { 1.0 } else { -1.0 });
    let dot: f64 = u.iter().zip(&d).map(|(a, b)| a * b).sum();
    u.iter_mut().zip(&d).for_each(|(a, b)| *a -= dot * b);
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.map(|v| v / norm)
}

/// Draws `n` samples; exactly `round(n · positive_rate)` (at least one of each
/// class) are positive. `shift` is added to every latent coordinate, so it is
/// expressed in per-metric standard deviations.
pub fn synth_generate(
    n: usize,
    positive_rate: f64,
    shift: &[f64; NUM_FEATURES],
    seed: u64,
) -> Result<Dataset> {
    if n < 10 {
        return Err(Error::structural(format!(
            "synthetic dataset needs n >= 10, got {n}"
        )));
    }
    if !(positive_rate > 0.0 && positive_rate < 1.0) {
        return Err(Error::structural(format!(
            "positive rate must lie in (0, 1), got {positive_rate}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_pos = ((n as f64 * positive_rate).round() as usize).clamp(1, n - 1);
    let mut labels: Vec<u8> = (0..n).map(|i| (i < n_pos) as u8).collect();
    labels.shuffle(&mut rng);

    let dir = separation_direction();
    let samples = labels
        .into_iter()
        .map(|label| {
            let features = (0..NUM_FEATURES)
                .map(|k| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let latent = z + shift[k] + f64::from(label) * SEPARATION * dir[k];
                    OFFSET[k] + SCALE[k] * latent
                })
                .collect();
            Sample { features, label }
        })
        .collect();
    Ok(Dataset::new(format!("synth-{seed}"), samples))
}
