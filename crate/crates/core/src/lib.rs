//! Deploy trained quantum neural networks onto simulated noisy devices.
//!
//! A trained classifier circuit is cut into narrow blocks, each block is
//! re-synthesized into several approximate candidates, and a deep-Q-learning
//! search picks one candidate per block so that a weighted sum of
//! classification accuracy and a noise-derived fairness score is maximized.
//!
//! | module | contents |
//! |---|---|
//! | [`quantum`] | matrices, gates, state-vector and density-matrix simulation, distances |
//! | [`circuit`] | circuit IR, CNOT count and depth, partitioning and recombination |
//! | [`synthesis`] | approximate re-synthesis of blocks into candidate lists |
//! | [`noise`] | device models, noisy execution, twirling, error-rate estimation |
//! | [`fairness`] | bias pairs, Lipschitz estimates, the fairness proxy |
//! | [`qnn`] | encoders, classifier templates, datasets, accuracy |
//! | [`rl`] | value networks, TD training and the deployment search |
//! | [`pipeline`] | experiment configuration, baselines, reports |
//!
//! Runnable walkthroughs of each capability live in the crate's `examples/`
//! directory (`cargo run --release --example <name>`).

pub mod circuit;
pub mod error;
pub mod fairness;
pub mod noise;
pub mod pipeline;
pub mod qnn;
pub mod quantum;
pub mod rl;
pub mod seed;
pub mod synthesis;

pub use error::{Error, Result};
