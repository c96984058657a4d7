use serde::{Deserialize, Serialize};

use super::model::{ModelParams, ParamVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Adam moment estimates with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState<S> {
    pub m: ParamVector<S>,
    pub v: ParamVector<S>,
    pub step_count: u64,
    pub beta1: S,
    pub beta2: S,
    pub epsilon: S,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(param_count: usize) -> Self {
        AdamState {
            m: ParamVector::zeros(param_count),
            v: ParamVector::zeros(param_count),
            step_count: 0,
            beta1: S::of(DEFAULT_BETA1),
            beta2: S::of(DEFAULT_BETA2),
            epsilon: S::of(DEFAULT_EPSILON),
        }
    }

    /// Applies one update to `params` in place.
    pub fn step(&mut self, params: &mut [S], grad: &[S], lr: S) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::structural(format!(
                "adam state sized for {} parameters, got params[{}] grad[{}]",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        self.step_count += 1;
        let t = self.step_count.min(i32::MAX as u64) as i32;
        let one = S::one();
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let correction1 = one - b1.powi(t);
        let correction2 = one - b2.powi(t);

        for ((p, &g), (m, v)) in params.iter_mut().zip(grad).zip(
            self.m
                .as_mut_slice()
                .iter_mut()
                .zip(self.v.as_mut_slice().iter_mut()),
        ) {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

/// One Adam step on a structured model.
pub fn adam_step<S: Scalar>(
    params: &ModelParams<S>,
    grad: &ParamVector<S>,
    state: &mut AdamState<S>,
    lr: S,
) -> Result<ModelParams<S>> {
    let mut flat = params.flatten();
    state.step(flat.as_mut_slice(), grad.as_slice(), lr)?;
    ModelParams::unflatten(&params.architecture(), &flat)
}
