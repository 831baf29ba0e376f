//! Belief-space task and motion planning for object search in household
//! environments: hierarchical Bayesian beliefs over object rooms, surfaces
//! and poses, language-model priors and co-location evidence, a
//! cost-sensitive replanning planner, a 2D household simulator and a
//! benchmark harness.

// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belief;
pub mod geometry;
pub mod harness;
pub mod ids;
pub mod planner;
pub mod priors;
pub mod sim;

pub use ids::{ObjectId, RoomId, SurfaceId};
