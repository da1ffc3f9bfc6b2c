//! Dense player embeddings learned by predicting possession outcomes from the
//! ten players on the floor, plus the tooling around them: ingestion,
//! validation by K–L divergence, embedding analysis, and Monte Carlo game and
//! series simulation.

pub mod analysis;
pub mod checkpoint;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod lineup_opt;
pub mod model;
pub mod outcome;
pub mod rng;
pub mod sim;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use ingest::{Play, PlayerRegistry};
pub use model::{EmbeddingModel, ModelConfig, OutcomeDistribution};
