use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before the log.
pub const PROB_CLAMP: f64 = 1e-12;

fn clamp_prob<S: Scalar>(p: S) -> S {
    let lo = S::of(PROB_CLAMP);
    let hi = S::one() - lo;
    p.max(lo).min(hi)
}

/// Categorical cross-entropy of one prediction: `-ln(probs[label])`.
pub fn cross_entropy<S: Scalar>(probs: &[S], label: usize) -> Result<S> {
    if label >= probs.len() || label > 1 {
        return Err(Error::structural(format!("label {label} outside {{0, 1}}")));
    }
    Ok(-clamp_prob(probs[label]).ln())
}

/// Mean cross-entropy over a batch of `(probs, label)` pairs.
pub fn mean_cross_entropy<'a, S: Scalar>(
    preds: impl IntoIterator<Item = (&'a [S], usize)>,
) -> Result<S> {
    let mut total = S::zero();
    let mut n = 0usize;
    for (probs, label) in preds {
        total += cross_entropy(probs, label)?;
        n += 1;
    }
    if n == 0 {
        return Err(Error::structural("mean loss over an empty batch"));
    }
    Ok(total / S::of(n as f64))
}

/// Gradient of the clamped cross-entropy w.r.t. the softmax logits.
///
/// Where the clamp is active the loss is locally constant, so the gradient is
/// zero.
pub fn cross_entropy_logit_grad<S: Scalar>(probs: &[S], label: usize) -> Vec<S> {
    let lo = S::of(PROB_CLAMP);
    let p = probs[label];
    if p < lo || p > S::one() - lo {
        return vec![S::zero(); probs.len()];
    }
    probs
        .iter()
        .enumerate()
        .map(|(k, &pk)| if k == label { pk - S::one() } else { pk })
        .collect()
}
