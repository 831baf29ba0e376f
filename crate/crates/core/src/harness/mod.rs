//! Experiment orchestration: the six method variants, single episodes,
//! paired benchmarks over sampled households with confidence-interval
//! summaries, and scripted regression scenarios.

mod bench;
mod episode;
mod metrics;
mod scenario;

pub use bench::{run_benchmark, BenchmarkConfig, BenchmarkResult, EpisodeRow, Layout, LAYOUTS};
pub use episode::{
    colocation_matrix, default_start, initial_belief, run_episode, EpisodeConfig, PriorSource, TaskSpec,
    VariantConfig,
};
pub use metrics::{mean_ci, pairwise_vs_best, MeanCi, MetricsTable, PairwiseRow, VariantMetrics};
pub use scenario::{run_scenario, Expectation, ScenarioFile, ScenarioReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario mismatch: {0}")]
    Scenario(String),

    #[error(transparent)]
    Prior(#[from] crate::priors::PriorError),

    #[error(transparent)]
    Plan(#[from] crate::planner::PlanError),

    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),

    #[error(transparent)]
    Belief(#[from] crate::belief::BeliefError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Annotators and seed of the bundled synthetic placement dataset.
pub const DATASET_ANNOTATORS: u32 = 10;
pub const DATASET_SEED: u64 = 0;

/// The bundled synthetic placement dataset used by default everywhere.
pub fn default_dataset() -> crate::sim::PlacementDataset {
    crate::sim::synthetic_dataset(DATASET_ANNOTATORS, DATASET_SEED)
}
