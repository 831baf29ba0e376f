//! Hierarchical recursive Bayesian estimation of an object's room, surface
//! and planar pose.
//!
//! The joint belief factors as `bel(room) * bel(surface | room) * bel(pose |
//! surface)`. The two categorical levels are discrete Bayes filters driven by
//! a visibility-aware detection model plus an optional co-location term that
//! lets detections of *other* objects shift the belief. The pose level is a
//! per-surface particle set updated by an occlusion-aware particle filter.

mod event;
mod hierarchical;
mod model;
mod particle;
mod semantic;
mod similarity;
mod visibility;

pub use event::{Detection, ObservationEvent, SeenMask};
pub use hierarchical::{BeliefSnapshot, HierarchicalBelief, Particle, PoseRegion};
pub use model::{
    colocation_prob, cross_object_room_likelihood, cross_object_surface_likelihood,
    location_obs_likelihood, own_location_likelihood, room_obs_likelihood,
    surface_colocation_prob, surface_obs_likelihood, NoiseParams,
};
pub use particle::{
    multinomial_resample, particle_weight_colocated, particle_weight_detected,
    particle_weight_missed, ParticleStepSummary,
};
pub use semantic::SemanticUpdateSummary;
pub use similarity::SimilarityMatrix;
pub use visibility::VisibilityReport;

use thiserror::Error;

/// Which level of the hierarchy an error or reset refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefLevel {
    Room,
    Surface,
    Pose,
}

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate {level:?}-level update: every hypothesis received zero likelihood")]
    Degenerate { level: BeliefLevel },

    #[error("invalid similarity matrix: {0}")]
    InvalidSimilarity(String),
}

pub type Result<T> = std::result::Result<T, BeliefError>;
