//! Burst-attack detection: turning telemetry traces into feature vectors,
//! generating labeled corpora of regular-overload vs. burst-attack runs,
//! training a small gradient-boosted-tree classifier from scratch, and
//! scoring it.

pub mod dataset;
pub mod features;
pub mod gbt;
pub mod metrics;

pub use dataset::{generate_dataset, train_test_split, Dataset, DatasetSpec, GridCell};
pub use features::{detection_priority, extract_features, feature_names, FEATURE_COUNT};
pub use gbt::{GbtModel, GbtParams};
pub use metrics::{evaluate_predictions, f1_score, EvalMetrics};
