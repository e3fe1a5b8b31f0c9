//! Temporal-graph link forecasting: node-pair metric embeddings learned by a
//! compression/reconstruction coder over neighborhood and link-history
//! features, a supervised forecasting pipeline on top of them, classic
//! topological and time-series baselines, and ranking metrics.
//!
//! The numeric core is generic over the scalar type (f32/f64); concrete f64
//! aliases for the main artifacts live at the crate root.

#![allow(clippy::needless_range_loop)] // indexed loops read better in the numeric kernels

pub mod autoenc;
pub mod baselines;
pub mod classify;
pub mod dense;
pub mod dyngraph;
pub mod error;
pub mod evalmetrics;
pub mod pairfeat;
pub mod pipeline;
pub mod scalar;

pub use error::{Error, Result};

/// Default scalar type for the command-line tools and experiments.
pub type Real = f64;

pub type Matrix64 = dense::Matrix<Real>;
pub type EmbeddingModel64 = autoenc::EmbeddingModel<Real>;
pub type PairFeature64 = pairfeat::PairFeature<Real>;
pub type StumpEnsemble64 = classify::StumpEnsemble<Real>;
pub type RankedScores64 = evalmetrics::RankedScores<Real>;
pub type DyLinkRun64 = pipeline::DyLinkRun<Real>;
