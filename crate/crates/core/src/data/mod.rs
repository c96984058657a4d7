//! Dataset ingestion, preprocessing and partitioning into simulated companies.

pub mod csv_io;
pub mod normalize;
pub mod partition;
pub mod rebalance;
pub mod schema;
pub mod split;
pub mod synth;

pub use csv_io::{load_csv, read_csv, write_csv};
pub use normalize::{apply_normalizer, fit_normalizer, NormalizationStats};
pub use partition::{partition_chunks, PartitionPlan};
pub use rebalance::{rebalance, RebalanceMode};
pub use schema::{Dataset, FeatureSchema, Sample, FEATURE_NAMES, LABEL_COLUMN, NUM_FEATURES};
pub use split::{split_train_test, DEFAULT_TEST_FRACTION};
pub use synth::synth_generate;
