//! Combined algorithm selection and hyperparameter optimisation for tabular
//! classification.
//!
//! A corpus of labelled training datasets is summarised by a catalogue of
//! 23 meta-features. A deep Q-network picks a small subset of those
//! meta-features, a random forest learns to map the subset to the best
//! performing algorithm of a fixed portfolio, and a genetic algorithm then
//! tunes the recommended algorithm on the new dataset. Every candidate is
//! scored by `accuracy * AUC`.
//!
//! The main entry points are [`pipeline::train_pipeline`] and
//! [`pipeline::recommend`]; the modules below can also be used on their own.

pub mod data;
pub mod dqn;
pub mod error;
pub mod ga;
pub mod meta_learner;
pub mod metafeatures;
pub mod metrics;
pub mod pipeline;
pub mod portfolio;
pub mod rewards;
pub mod seeds;
pub mod synthetic;

pub use error::{Error, Result};
