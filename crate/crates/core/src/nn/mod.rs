//! From-scratch classifier: LSTM cell, dense stack, loss, Adam and weight
//! (de)serialization.

pub mod adam;
pub mod checkpoint;
pub mod dense;
pub mod loss;
pub mod lstm;
pub mod model;
pub mod tensor;

pub use adam::{adam_step, AdamState};
pub use dense::{Activation, DenseLayerParams};
pub use loss::{cross_entropy, mean_cross_entropy};
pub use lstm::{lstm_backward, lstm_forward, LstmCache, LstmCellParams};
pub use model::{argmax, Architecture, ModelCache, ModelParams, ParamVector};
pub use tensor::Tensor;

use crate::error::Result;
use crate::scalar::Scalar;

/// Forward pass of the detector for one feature vector.
pub fn model_forward<S: Scalar>(x: &[S], p: &ModelParams<S>) -> Result<(Vec<S>, ModelCache<S>)> {
    p.forward(x)
}

/// Gradient of the mean batch loss in canonical layout.
pub fn backward<'a, S: Scalar>(
    batch: impl IntoIterator<Item = (&'a [S], usize)>,
    p: &ModelParams<S>,
) -> Result<ParamVector<S>> {
    p.backward(batch)
}

pub fn flatten_params<S: Scalar>(p: &ModelParams<S>) -> ParamVector<S> {
    p.flatten()
}

pub fn unflatten_params<S: Scalar>(v: &ParamVector<S>) -> Result<ModelParams<S>> {
    ModelParams::unflatten(&Architecture::default(), v)
}

/// Seeded detector initialization.
pub fn init_params<S: Scalar>(seed: u64) -> ModelParams<S> {
    ModelParams::init(&Architecture::default(), seed)
}
