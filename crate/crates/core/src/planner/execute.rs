use std::collections::{BTreeSet, VecDeque};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::streams::inverse_reach;
use super::{ActionInstance, ActionKind, Goal, PlanError, Planner, Result, SymbolicState};
use crate::belief::{
    BeliefError, BeliefLevel, BeliefSnapshot, HierarchicalBelief, NoiseParams, ObservationEvent, SimilarityMatrix,
};
use crate::ids::{ObjectId, RoomId, SurfaceId};
use crate::sim::{EnvironmentSpec, World};

/// How categorical beliefs react to a detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    Bayes,
    BayesCoModel,
    Lgbu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PlanTimeMode {
    /// Measured wall-clock time of each planner call.
    WallClock,
    /// Deterministic charge per expanded search node.
    Modeled { seconds_per_node: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSettings {
    pub update: UpdateMode,
    pub replan_cap: usize,
    pub noise: NoiseParams,
    pub plan_time: PlanTimeMode,
    /// Keep a belief snapshot per planning iteration.
    pub record_snapshots: bool,
    pub seed: u64,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self {
            update: UpdateMode::Bayes,
            replan_cap: 100,
            noise: NoiseParams::default(),
            plan_time: PlanTimeMode::WallClock,
            record_snapshots: false,
            seed: 0,
        }
    }
}

/// Replacement of the categorical belief levels after a detect, used
/// instead of the Bayes step by the LGBU variants.
pub trait LgbuUpdater {
    /// Returns the new room belief and the new per-room surface beliefs.
    fn replace(
        &self,
        env: &EnvironmentSpec,
        belief: &HierarchicalBelief,
        event: &ObservationEvent,
        inspected: SurfaceId,
    ) -> std::result::Result<(Vec<f64>, Vec<Vec<f64>>), String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectRecord {
    pub surface: SurfaceId,
    pub room: RoomId,
    pub success: bool,
    /// Other objects seen by the same sweep.
    pub co_detected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub plan: Vec<ActionInstance>,
    pub plan_cost: f64,
    /// Number of plan actions executed, including the failing one.
    pub executed: usize,
    pub failure: Option<String>,
    pub plan_time: f64,
    pub exec_time: f64,
    pub expanded: usize,
    pub snapshot: Option<BeliefSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanTrace {
    pub iterations: Vec<IterationRecord>,
    pub detects: Vec<DetectRecord>,
    pub replans: usize,
    pub solved: bool,
    pub plan_time: f64,
    pub exec_time: f64,
    pub cumulative_time: f64,
}

impl PlanTrace {
    fn finish(&mut self) {
        self.replans = self.iterations.len().saturating_sub(1);
        self.plan_time = self.iterations.iter().map(|i| i.plan_time).sum();
        self.exec_time = self.iterations.iter().map(|i| i.exec_time).sum();
        self.cumulative_time = self.plan_time + self.exec_time;
    }

    /// Surfaces targeted by each detect, in order.
    pub fn detect_surfaces(&self) -> Vec<SurfaceId> {
        self.detects.iter().map(|d| d.surface).collect()
    }
}

/// After a successful detect, re-derive grasp bindings of the remaining
/// steps from the observed pose.
fn rebind(steps: &mut VecDeque<ActionInstance>, env: &EnvironmentSpec, observed: crate::geometry::Pose2, reach: f64) -> bool {
    let Some(pick_at) = steps.iter().position(|a| a.kind == ActionKind::Pick) else {
        return true;
    };
    let Some(base) = inverse_reach(env, &observed, reach) else {
        return false;
    };
    steps[pick_at].pose = Some(observed);
    steps[pick_at].base = Some(base);
    if pick_at > 0 && steps[pick_at - 1].kind == ActionKind::Move {
        steps[pick_at - 1].base = Some(base);
    } else {
        steps.insert(pick_at, ActionInstance::move_to(base, 1e-6));
    }
    true
}

fn recover<T>(r: std::result::Result<T, BeliefError>, on_degenerate: impl FnOnce(BeliefLevel)) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(BeliefError::Degenerate { level }) => {
            on_degenerate(level);
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Drops detections of other objects already used as co-location evidence at
/// the same surface. Those objects do not move, so seeing them again is not
/// new evidence about the target.
fn fresh_colocation_event(event: &ObservationEvent, used: &mut BTreeSet<(ObjectId, SurfaceId)>) -> ObservationEvent {
    let mut out = event.clone();
    out.detections
        .retain(|d| d.object == event.target || used.insert((d.object, d.surface)));
    out
}

/// Folds one detect into the belief: semantic update (Bayes, Bayes with
/// co-location, or LGBU replacement) then the particle filter, re-seeding
/// any emptied surface.
#[allow(clippy::too_many_arguments)]
fn apply_detect<R: Rng + ?Sized>(
    belief: &mut HierarchicalBelief,
    event: &ObservationEvent,
    inspected: SurfaceId,
    env: &EnvironmentSpec,
    sims: Option<&SimilarityMatrix>,
    settings: &EpisodeSettings,
    lgbu: Option<&dyn LgbuUpdater>,
    rng: &mut R,
) -> Result<()> {
    let noise = &settings.noise;
    let co = match settings.update {
        UpdateMode::BayesCoModel => sims,
        _ => None,
    };
    match settings.update {
        UpdateMode::Lgbu => {
            let updater = lgbu.ok_or_else(|| PlanError::Contract("LGBU update without an updater".into()))?;
            match updater.replace(env, belief, event, inspected) {
                Ok((rooms, surfaces)) => {
                    belief.set_room_belief(rooms)?;
                    for (r, p) in surfaces.into_iter().enumerate() {
                        belief.set_surface_belief(RoomId(r), p)?;
                    }
                }
                Err(msg) => return Err(PlanError::Contract(format!("LGBU update failed: {msg}"))),
            }
        }
        UpdateMode::Bayes | UpdateMode::BayesCoModel => {
            let mut degenerate = None;
            recover(belief.update_semantic_belief(event, co, noise), |l| degenerate = Some(l))?;
            if let Some(level) = degenerate {
                log::warn!("degenerate {level:?} update, resetting the level");
                belief.reset_level(level, env, rng);
            }
        }
    }
    let mut degenerate = None;
    recover(belief.particle_filter_step(event, co, noise, rng), |l| degenerate = Some(l))?;
    if let Some(level) = degenerate {
        log::warn!("degenerate {level:?} particle update, resetting");
        belief.reset_level(level, env, rng);
    }
    belief.reseed_empty_surfaces(env, rng);
    Ok(())
}

/// Plan, execute, observe, update, and replan on failure until the goal
/// holds or `settings.replan_cap` replans have been spent.
#[allow(clippy::too_many_arguments)]
pub fn execute_and_replan<R: Rng + ?Sized>(
    goal: Goal,
    planner: &Planner,
    world: &mut World,
    belief: &mut HierarchicalBelief,
    sims: Option<&SimilarityMatrix>,
    settings: &EpisodeSettings,
    lgbu: Option<&dyn LgbuUpdater>,
    rng: &mut R,
) -> Result<PlanTrace> {
    if settings.replan_cap == 0 {
        return Err(PlanError::Contract("replan cap must be at least 1".into()));
    }
    let target = goal.object();
    let mut state = SymbolicState::new(world.robot().base);
    let mut co_evidence: BTreeSet<(ObjectId, SurfaceId)> = BTreeSet::new();
    let mut trace = PlanTrace {
        iterations: Vec::new(),
        detects: Vec::new(),
        replans: 0,
        solved: false,
        plan_time: 0.0,
        exec_time: 0.0,
        cumulative_time: 0.0,
    };

    loop {
        if goal.satisfied(&state) {
            trace.solved = true;
            break;
        }
        if trace.iterations.len() > settings.replan_cap {
            break;
        }
        let snapshot = settings.record_snapshots.then(|| belief.snapshot(settings.seed));
        let started = Instant::now();
        let planned = planner.plan(&state, goal, belief, world.env(), rng);
        let wall = started.elapsed().as_secs_f64();
        let plan = match planned {
            Ok(p) => p,
            Err(e) => {
                trace.iterations.push(IterationRecord {
                    plan: Vec::new(),
                    plan_cost: 0.0,
                    executed: 0,
                    failure: Some(format!("planning failed: {e}")),
                    plan_time: wall,
                    exec_time: 0.0,
                    expanded: 0,
                    snapshot,
                });
                break;
            }
        };
        let plan_time = match settings.plan_time {
            PlanTimeMode::WallClock => wall,
            PlanTimeMode::Modeled { seconds_per_node } => seconds_per_node * (plan.expanded as f64 + 1.0),
        };
        let exec_before = world.elapsed();
        let mut record = IterationRecord {
            plan: plan.actions.clone(),
            plan_cost: plan.cost,
            executed: 0,
            failure: None,
            plan_time,
            exec_time: 0.0,
            expanded: plan.expanded,
            snapshot,
        };

        let mut steps: VecDeque<ActionInstance> = plan.actions.into();
        while let Some(action) = steps.pop_front() {
            record.executed += 1;
            let detect_belief = (action.kind == ActionKind::Detect).then_some(&*belief);
            let outcome = world.execute_action(&action, detect_belief)?;
            match action.kind {
                ActionKind::Move if outcome.success => {
                    state.base = action.base.expect("move has a base");
                }
                ActionKind::Detect => {
                    let det = outcome.detection.as_ref().expect("detect reports a detection");
                    let inspected = action.surface.expect("detect has a surface");
                    trace.detects.push(DetectRecord {
                        surface: inspected,
                        room: action.room.expect("detect has a room"),
                        success: outcome.success,
                        co_detected: det
                            .detections
                            .iter()
                            .filter(|d| d.object != target)
                            .map(|d| world.env().object(d.object).label.clone())
                            .collect(),
                    });
                    let mut event = det.to_event()?;
                    if settings.update == UpdateMode::BayesCoModel {
                        event = fresh_colocation_event(&event, &mut co_evidence);
                    }
                    if event.visibility.is_blind() && event.detections.is_empty() {
                        return Err(PlanError::Contract(
                            "detect observed nothing; replanning on it would repeat the plan".into(),
                        ));
                    }
                    let before = belief.clone();
                    apply_detect(belief, &event, inspected, world.env(), sims, settings, lgbu, rng)?;
                    // LGBU replacements may legitimately repeat the previous belief
                    if settings.update != UpdateMode::Lgbu && *belief == before {
                        return Err(PlanError::Contract("informative detect left the belief unchanged".into()));
                    }
                    if let Some(d) = event.detection_of(target) {
                        state.located.insert(target, (d.surface, d.pose));
                        if !rebind(&mut steps, world.env(), d.pose, world.timing().reach) {
                            steps.clear();
                            record.failure = Some("no grasp configuration for the observed pose".into());
                        }
                    }
                }
                ActionKind::Pick if outcome.success => {
                    state.holding = Some(target);
                    state.located.remove(&target);
                }
                ActionKind::Place if outcome.success => {
                    state.holding = None;
                    let s = action.surface.expect("place has a surface");
                    state.located.insert(target, (s, action.pose.expect("place has a pose")));
                }
                _ => {}
            }
            if outcome.success {
                state.total_cost += action.cost;
            } else {
                record.failure = outcome.reason.clone();
                // a failed grasp invalidates the located pose
                if action.kind == ActionKind::Pick {
                    state.located.remove(&target);
                }
                break;
            }
            if goal.satisfied(&state) || record.failure.is_some() {
                break;
            }
        }
        record.exec_time = world.elapsed() - exec_before;
        trace.iterations.push(record);
    }
    trace.finish();
    Ok(trace)
}
