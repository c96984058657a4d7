//! Hierarchical FedAvg: clients train locally, combiners average their
//! clients, the reducer combines the combiners and drives the rounds.

pub mod aggregate;
pub mod client;
pub mod orchestrator;
pub mod topology;

pub use aggregate::{
    aggregation_weights, combiner_aggregate, reducer_reduce, ModelUpdate, ReducerMode,
};
pub use client::{client_update, sample_clients};
pub use orchestrator::{
    run_federation, run_federation_from, run_round, weights_checksum, FederationOutcome,
    RoundConfig, RoundLog,
};
pub use topology::{default_assignment, ClientNode, FederationTopology};
