//! Fleet-based regression for heterogeneous tabular populations.
//!
//! The core idea: when one dataset mixes several operating regimes (say,
//! vehicles in very different climates), a single regression model has to
//! average across regimes. This crate instead partitions the rows, either by
//! k-means in standardized feature space or by labels the data already
//! carries, fits one small regressor per partition, and routes each query to
//! the nearest partition's model at prediction time.
//!
//! The pieces are usable on their own:
//!
//! - [`tabular`]: datasets, CSV round-trips, standardization, shuffled
//!   k-fold plans, and regression metrics.
//! - [`synthgen`]: a clustered synthetic data generator with a known global
//!   trend and per-cluster local trends, useful for controlled evaluation.
//! - [`clustering`]: k-means with careful seeding and restart policy.
//! - [`regressors`]: ridge, k-nearest-neighbors, random forest, and a small
//!   multilayer perceptron, all behind one spec/fit/predict interface.
//! - [`fbr`]: the fleet orchestration itself plus global baselines and
//!   cross-validated comparisons.
//! - [`explain`]: local surrogate explanations and cross-model consistency
//!   summaries.
//! - [`experiment`]: file-level runs (benchmark, difficulty sweep, explain,
//!   full reproduction) driven by a JSON config.
//!
//! Every fit is deterministic given the config seed: clusters, folds, and
//! models draw from independent counter-derived streams, so adding a cluster
//! or deleting one never shifts the randomness of its neighbors.

pub mod clustering;
pub mod error;
pub mod experiment;
pub mod explain;
pub mod fbr;
pub mod linalg;
pub mod regressors;
pub mod rng;
pub mod synthgen;
pub mod tabular;

pub use error::{Error, Result};
