//! Deterministic 2D household world: rooms separated by walls with doorways,
//! rectangular surfaces, box occluders, objects with ground-truth poses, a
//! robot with a head-pan visibility cone, a noisy detector, and an
//! annotation-driven environment sampler.

mod dataset;
mod env;
mod exec;
mod sample;
mod sensing;
mod svg;

pub use dataset::{
    aggregate_annotations, score_annotation, synthetic_dataset, synthetic_room_types, AggregatedPlacement,
    AnnotationEntry, Category, PlacementDataset,
};
pub use env::{
    EnvBuilder, EnvironmentSpec, HeightClass, NavGraph, NavNode, ObjectPlacement, Room, Surface,
    ENV_SCHEMA_VERSION,
};
pub use exec::{ActionOutcome, ExecTiming, World};
pub use sample::{placement_distribution, sample_environment, EnvSampleConfig, DOOR_WIDTH, ROOM_SIZE};
pub use sensing::{
    point_visible, sense, sweep_mask, visible_particles, DetectionResult, NoiseSource, RandomNoise, RobotState, ScriptedNoise,
    SensorConfig,
};
pub use svg::render_svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("environment generation failed: {0}")]
    Generation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Belief(#[from] crate::belief::BeliefError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
