//! Cost-minimizing planner over move / detect / pick / place with
//! belief-dependent detect costs, and the interleaved plan-execute-update
//! loop.

mod execute;
mod search;
mod streams;

pub use execute::{
    execute_and_replan, DetectRecord, EpisodeSettings, IterationRecord, LgbuUpdater, PlanTimeMode, PlanTrace,
    UpdateMode,
};
pub use search::{DetectBinding, Loc, Node, PlanResult, Planner, PlannerConfig, PlanningProblem};
pub use streams::{
    detect_cost, inverse_reach, inverse_visibility, sample_pose_b, surface_view_mask, ViewConfig, DETECT_COST_FLOOR,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Pose2;
use crate::ids::{ObjectId, RoomId, SurfaceId};
use crate::sim::EnvironmentSpec;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("stream exhausted: {0}")]
    StreamExhausted(String),

    #[error("no plan found within {0} expanded nodes")]
    Budget(usize),

    #[error("no plan reaches the goal")]
    NoPlan,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Belief(#[from] crate::belief::BeliefError),

    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

pub type Result<T> = std::result::Result<T, PlanError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Move,
    Detect,
    Pick,
    Place,
}

/// Grounded action. Which bindings are set depends on the kind: move uses
/// `base`; detect uses all seven; pick uses object, pose and base; place
/// uses object, surface, room, pose and base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionInstance {
    pub kind: ActionKind,
    pub object: Option<ObjectId>,
    pub surface: Option<SurfaceId>,
    pub room: Option<RoomId>,
    /// Sampled object pose (`?pb`), grasp pose or placement pose.
    pub pose: Option<Pose2>,
    /// Base configuration (`?bq`); the destination for a move.
    pub base: Option<Pose2>,
    /// Head configuration (`?hq`), pan relative to the base.
    pub head: Option<f64>,
    /// Head trajectory (`?ht`).
    #[serde(default)]
    pub trajectory: Vec<f64>,
    pub cost: f64,
}

impl ActionInstance {
    pub fn move_to(base: Pose2, cost: f64) -> Self {
        Self {
            kind: ActionKind::Move,
            object: None,
            surface: None,
            room: None,
            pose: None,
            base: Some(base),
            head: None,
            trajectory: Vec::new(),
            cost,
        }
    }

    /// Human-readable form, e.g. `detect apple table kitchen`.
    pub fn describe(&self, env: &EnvironmentSpec) -> String {
        let mut parts = vec![format!("{:?}", self.kind).to_lowercase()];
        if let Some(o) = self.object {
            parts.push(env.object(o).label.clone());
        }
        if let Some(s) = self.surface {
            parts.push(env.surface(s).label.clone());
        }
        if let Some(r) = self.room {
            parts.push(env.room(r).label.clone());
        }
        if self.kind == ActionKind::Move {
            if let Some(b) = self.base {
                parts.push(format!("({:.2}, {:.2})", b.x, b.y));
            }
        }
        parts.join(" ")
    }
}

/// Ground literal over the fixed predicate vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Literal {
    IsItem(ObjectId),
    IsSurf(SurfaceId),
    IsRoom(RoomId),
    HandEmpty,
    Holding(ObjectId),
    AtBConf(Pose2),
    PoseB(ObjectId, Pose2, SurfaceId),
    Supported(ObjectId, Pose2, SurfaceId),
    AtPoseB(ObjectId, Pose2),
    At(ObjectId, SurfaceId),
}

/// Fluent part of the symbolic state; static type literals come from the
/// environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicState {
    /// The single `AtBConf` literal.
    pub base: Pose2,
    /// `None` means `HandEmpty`.
    pub holding: Option<ObjectId>,
    /// Objects with established `Supported` and `AtPoseB` literals.
    pub located: BTreeMap<ObjectId, (SurfaceId, Pose2)>,
    pub total_cost: f64,
}

impl SymbolicState {
    pub fn new(base: Pose2) -> Self {
        Self {
            base,
            holding: None,
            located: BTreeMap::new(),
            total_cost: 0.0,
        }
    }

    pub fn literals(&self, env: &EnvironmentSpec) -> Vec<Literal> {
        let mut out: Vec<Literal> = env.objects.iter().map(|o| Literal::IsItem(o.id)).collect();
        out.extend(env.surfaces.iter().map(|s| Literal::IsSurf(s.id)));
        out.extend(env.rooms.iter().map(|r| Literal::IsRoom(r.id)));
        out.push(match self.holding {
            Some(o) => Literal::Holding(o),
            None => Literal::HandEmpty,
        });
        out.push(Literal::AtBConf(self.base));
        for (&o, &(s, p)) in &self.located {
            out.push(Literal::Supported(o, p, s));
            out.push(Literal::AtPoseB(o, p));
            out.push(Literal::At(o, s));
        }
        out
    }
}

/// Task goal for the searched object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goal {
    /// The object's pose is established by a detect.
    Located(ObjectId),
    /// The object rests on the surface and is not held.
    At(ObjectId, SurfaceId),
}

impl Goal {
    pub fn object(&self) -> ObjectId {
        match *self {
            Goal::Located(o) | Goal::At(o, _) => o,
        }
    }

    pub fn satisfied(&self, state: &SymbolicState) -> bool {
        match *self {
            Goal::Located(o) => state.located.contains_key(&o),
            Goal::At(o, s) => state.holding != Some(o) && state.located.get(&o).is_some_and(|&(at, _)| at == s),
        }
    }
}
