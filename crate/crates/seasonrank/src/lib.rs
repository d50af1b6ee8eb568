//! Season-ranking pipeline for team sports: siamese team embeddings,
//! gradient-boosted ranking objectives, tally-rank standings, and a ranking
//! evaluation suite (AP/mAP, Spearman's rho, NDCG) with naive and randomized
//! baselines.

pub mod error;
pub mod gbm;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod ranker;
pub mod siamese;

pub use error::{Error, Result};
