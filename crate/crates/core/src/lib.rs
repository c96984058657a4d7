//! Federated God-Class detection over tabular code metrics.
//!
//! An LSTM-plus-dense classifier is trained from scratch on the 16 class-level
//! metrics, either centrally or across simulated companies arranged as a
//! reducer, combiners and clients that exchange flattened weights with FedAvg.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common cases.

pub mod data;
pub mod error;
pub mod experiments;
pub mod federation;
pub mod metrics;
pub mod nn;
pub mod scalar;
pub mod seed;
pub mod train;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;
pub use train::{train_centralized, train_local, Hyperparams};

pub type Model = nn::ModelParams<f64>;
pub type Model32 = nn::ModelParams<f32>;
pub type Weights = nn::ParamVector<f64>;
pub type Weights32 = nn::ParamVector<f32>;
pub type Update = federation::ModelUpdate<f64>;
pub type Topology = federation::FederationTopology<f64>;
