use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sensing::sense;
use super::{DetectionResult, EnvironmentSpec, NoiseSource, Result, RobotState, SensorConfig, SimError};
use crate::belief::{HierarchicalBelief, NoiseParams};
use crate::geometry::Pose2;
use crate::ids::{ObjectId, SurfaceId};
use crate::planner::{ActionInstance, ActionKind};

/// Simulated execution time model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecTiming {
    /// Base speed along navigation paths, m/s.
    pub nav_speed: f64,
    /// Seconds per head waypoint of a detect sweep.
    pub per_waypoint: f64,
    /// Seconds per pick or place.
    pub manipulation: f64,
    /// Maximum base-to-object distance for a pick or place, meters.
    pub reach: f64,
    /// Maximum distance between the commanded grasp pose and the object.
    pub grasp_tolerance: f64,
}

impl Default for ExecTiming {
    fn default() -> Self {
        Self {
            nav_speed: 0.25,
            per_waypoint: 2.0,
            manipulation: 5.0,
            reach: 0.8,
            grasp_tolerance: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionOutcome {
    pub kind: ActionKind,
    pub success: bool,
    /// Simulated seconds spent.
    pub duration: f64,
    pub detection: Option<DetectionResult>,
    pub reason: Option<String>,
}

impl ActionOutcome {
    fn ok(kind: ActionKind, duration: f64) -> Self {
        Self {
            kind,
            success: true,
            duration,
            detection: None,
            reason: None,
        }
    }

    fn fail(kind: ActionKind, duration: f64, reason: impl Into<String>) -> Self {
        Self {
            kind,
            success: false,
            duration,
            detection: None,
            reason: Some(reason.into()),
        }
    }
}

/// Ground-truth world the executor acts on.
pub struct World {
    env: Arc<EnvironmentSpec>,
    sensor: SensorConfig,
    noise: NoiseParams,
    timing: ExecTiming,
    robot: RobotState,
    /// True placement per object; `None` while held.
    poses: Vec<Option<(SurfaceId, Pose2)>>,
    /// Objects whose pose the last detects established.
    confirmed: BTreeSet<ObjectId>,
    source: Box<dyn NoiseSource>,
    elapsed: f64,
}

impl World {
    pub fn new(
        env: Arc<EnvironmentSpec>,
        start: Pose2,
        sensor: SensorConfig,
        noise: NoiseParams,
        timing: ExecTiming,
        source: Box<dyn NoiseSource>,
    ) -> Self {
        let poses = env.objects.iter().map(|o| Some((o.surface, o.pose))).collect();
        Self {
            env,
            sensor,
            noise,
            timing,
            robot: RobotState::at(start),
            poses,
            confirmed: BTreeSet::new(),
            source,
            elapsed: 0.0,
        }
    }

    pub fn env(&self) -> &EnvironmentSpec {
        &self.env
    }

    pub fn robot(&self) -> &RobotState {
        &self.robot
    }

    pub fn sensor(&self) -> &SensorConfig {
        &self.sensor
    }

    pub fn timing(&self) -> &ExecTiming {
        &self.timing
    }

    pub fn object_pose(&self, object: ObjectId) -> Option<(SurfaceId, Pose2)> {
        self.poses[object.index()]
    }

    /// Simulated seconds spent executing so far.
    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    fn required<T>(v: Option<T>, what: &str, kind: ActionKind) -> Result<T> {
        v.ok_or_else(|| SimError::Contract(format!("{kind:?} without {what}")))
    }

    /// Runs one action. Failures of the world (missed object, unreachable
    /// grasp) are reported in the outcome; symbolically invalid actions are
    /// errors.
    pub fn execute_action(&mut self, action: &ActionInstance, belief: Option<&HierarchicalBelief>) -> Result<ActionOutcome> {
        let kind = action.kind;
        let outcome = match kind {
            ActionKind::Move => {
                let dest = Self::required(action.base, "base configuration", kind)?;
                match self.env.nav_distance(self.robot.base.position(), dest.position()) {
                    Some(d) => {
                        self.robot.base = dest;
                        self.robot.head_pan = 0.0;
                        ActionOutcome::ok(kind, d / self.timing.nav_speed)
                    }
                    None => ActionOutcome::fail(kind, 0.0, "destination unreachable"),
                }
            }
            ActionKind::Detect => {
                let base = Self::required(action.base, "base configuration", kind)?;
                let object = Self::required(action.object, "object", kind)?;
                let belief = Self::required(belief, "belief", kind)?;
                if belief.object() != object {
                    return Err(SimError::Contract("detect belief does not match its object".into()));
                }
                if base.position().distance(self.robot.base.position()) > 1e-6 {
                    return Err(SimError::Contract("detect from a base configuration the robot is not at".into()));
                }
                self.robot.base = base;
                let result = sense(
                    &self.env,
                    &self.sensor,
                    &base,
                    &action.trajectory,
                    &self.poses,
                    belief,
                    &self.noise,
                    self.source.as_mut(),
                )?;
                self.robot.head_pan = action.trajectory.last().copied().unwrap_or(0.0);
                self.confirmed.clear();
                self.confirmed.extend(result.detections.iter().map(|d| d.object));
                let duration = self.timing.per_waypoint * action.trajectory.len() as f64;
                let mut out = if result.target_detected() {
                    ActionOutcome::ok(kind, duration)
                } else {
                    ActionOutcome::fail(kind, duration, "target not detected")
                };
                out.detection = Some(result);
                out
            }
            ActionKind::Pick => {
                let object = Self::required(action.object, "object", kind)?;
                let grasp = Self::required(action.pose, "grasp pose", kind)?;
                if self.robot.holding.is_some() {
                    return Err(SimError::Contract("pick with a full hand".into()));
                }
                let d = self.timing.manipulation;
                match self.poses[object.index()] {
                    _ if !self.confirmed.contains(&object) => {
                        ActionOutcome::fail(kind, d, "object pose not established by a detect")
                    }
                    None => ActionOutcome::fail(kind, d, "object not on any surface"),
                    Some((_, truth)) => {
                        if truth.distance(&grasp) > self.timing.grasp_tolerance {
                            ActionOutcome::fail(kind, d, "object not at the grasp pose")
                        } else if truth.distance(&self.robot.base) > self.timing.reach {
                            ActionOutcome::fail(kind, d, "object out of reach")
                        } else {
                            self.poses[object.index()] = None;
                            self.robot.holding = Some(object);
                            self.confirmed.remove(&object);
                            ActionOutcome::ok(kind, d)
                        }
                    }
                }
            }
            ActionKind::Place => {
                let object = Self::required(action.object, "object", kind)?;
                let surface = Self::required(action.surface, "surface", kind)?;
                let pose = Self::required(action.pose, "placement pose", kind)?;
                if self.robot.holding != Some(object) {
                    return Err(SimError::Contract(format!("place of {object} which is not held")));
                }
                let d = self.timing.manipulation;
                let fp = self.env.surface(surface).footprint;
                if !fp.contains(pose.position()) {
                    ActionOutcome::fail(kind, d, "placement pose not on the surface")
                } else if pose.distance(&self.robot.base) > self.timing.reach {
                    ActionOutcome::fail(kind, d, "placement pose out of reach")
                } else {
                    self.poses[object.index()] = Some((surface, pose));
                    self.robot.holding = None;
                    ActionOutcome::ok(kind, d)
                }
            }
        };
        self.elapsed += outcome.duration;
        Ok(outcome)
    }
}
