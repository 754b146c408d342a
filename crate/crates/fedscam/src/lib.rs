//! Deterministic federated-optimization laboratory.
//!
//! The crate simulates synchronous federated training rounds over an
//! in-memory data plane (synthetic Gaussian blobs or IDX image files split
//! by a Dirichlet label-skew partitioner). Local training supports SGD,
//! proximal SGD, and several sharpness-aware (two-step perturbation)
//! variants; the server side offers sample-count, uniform, momentum,
//! loss-weighted, and heterogeneity/alignment-aware aggregation, including
//! clustered conflict dampening over random-projection update summaries.
//!
//! Everything derives from a single master seed through labeled seed
//! derivation ([`seed::derive_seed`]), so experiments are bit-reproducible
//! and client work can run on any number of worker threads without changing
//! results. The `fedscam` binary wraps the engine behind `run`,
//! `partition-stats`, and `compare` subcommands.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod data;
pub mod engine;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod scam;
pub mod seed;

pub use config::{parse_config_path, parse_config_str, ConfigError, ExperimentConfig};
pub use engine::{client_drift, run_experiment, Algorithm, Experiment, RoundRecord, RunError};
pub use model::{ModelSpec, ParamVector};
