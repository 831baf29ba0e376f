use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::streams::{detect_cost, inverse_reach, inverse_visibility, sample_pose_b, surface_view_mask, ViewConfig};
use super::{ActionInstance, ActionKind, Goal, PlanError, Result, SymbolicState};
use crate::belief::{HierarchicalBelief, PoseRegion};
use crate::geometry::{Point2, Pose2};
use crate::ids::{RoomId, SurfaceId};
use crate::sim::{EnvironmentSpec, SensorConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Surfaces, by joint belief mass, that get detect candidates.
    pub top_b: usize,
    /// `sample-PoseB` draws per candidate surface.
    pub pose_samples: usize,
    /// Maximum expanded search nodes per call.
    pub node_budget: usize,
    pub move_cost_per_meter: f64,
    pub pick_cost: f64,
    pub place_cost: f64,
    /// Base-to-object distance for pick and place, meters.
    pub reach: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            top_b: 5,
            pose_samples: 4,
            node_budget: 200_000,
            move_cost_per_meter: 0.1,
            pick_cost: 1.0,
            place_cost: 1.0,
            reach: 0.8,
        }
    }
}

/// Grounded detect candidate produced by the streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectBinding {
    pub surface: SurfaceId,
    pub room: RoomId,
    pub pose: Pose2,
    pub view: ViewConfig,
    /// Joint belief mass of the particles the sweep would see.
    pub mass: f64,
    pub cost: f64,
    /// Index of the viewing configuration in [`PlanningProblem::configs`].
    pub config: usize,
    /// Index of the grasp configuration, when one exists.
    pub pick_config: Option<usize>,
}

/// Where the target is believed to be at a search node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Loc {
    Unknown,
    /// Located before planning started.
    Known,
    /// Optimistically located by detect binding `i`.
    Binding(usize),
    /// Put down on the goal surface.
    Placed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub config: usize,
    pub loc: Loc,
    pub holding: bool,
}

/// Finite grounding of one planning call: base configurations, detect
/// bindings and manipulation bindings. Search runs over it.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub goal: Goal,
    /// Base configurations; index 0 is the robot's current one.
    pub configs: Vec<Pose2>,
    /// Surface each configuration serves, for tie-breaking.
    pub config_surface: Vec<usize>,
    pub detects: Vec<DetectBinding>,
    /// Grasp configuration and pose when the target was located up front.
    pub known: Option<(SurfaceId, Pose2, Option<usize>)>,
    /// Placement configuration, pose, surface and room for `Goal::At`.
    pub place: Option<(usize, Pose2, SurfaceId, RoomId)>,
    pub start_holding: bool,
    move_costs: Vec<Vec<Option<f64>>>,
    pick_cost: f64,
    place_cost: f64,
}

/// Tie-break key of one action: (surface, configuration, kind).
type ActionKey = (usize, usize, u8);

impl PlanningProblem {
    pub fn initial(&self) -> Node {
        Node {
            config: 0,
            loc: if self.known.is_some() { Loc::Known } else { Loc::Unknown },
            holding: self.start_holding,
        }
    }

    pub fn is_goal(&self, n: &Node) -> bool {
        match self.goal {
            Goal::Located(_) => n.loc != Loc::Unknown,
            Goal::At(_, s) => {
                !n.holding
                    && match n.loc {
                        Loc::Placed => true,
                        Loc::Known => self.known.is_some_and(|(at, _, _)| at == s),
                        Loc::Binding(b) => self.detects[b].surface == s,
                        Loc::Unknown => false,
                    }
            }
        }
    }

    pub fn move_cost(&self, from: usize, to: usize) -> Option<f64> {
        self.move_costs[from][to]
    }

    fn pick_of(&self, loc: Loc) -> Option<(usize, Pose2, SurfaceId)> {
        match loc {
            Loc::Known => self.known.and_then(|(s, p, c)| c.map(|c| (c, p, s))),
            Loc::Binding(b) => {
                let d = &self.detects[b];
                d.pick_config.map(|c| (c, d.pose, d.surface))
            }
            _ => None,
        }
    }

    /// Applicable actions at `n`. With `restricted`, moves only go to
    /// configurations some next action can use; without it, to every
    /// configuration.
    pub fn successors(&self, n: &Node, restricted: bool) -> Vec<(ActionInstance, Node)> {
        let object = self.goal.object();
        let mut out = Vec::new();
        let mut useful = vec![!restricted; self.configs.len()];
        if restricted {
            match (n.loc, n.holding) {
                (Loc::Unknown, _) => {
                    for d in &self.detects {
                        useful[d.config] = true;
                    }
                }
                (_, true) => {
                    if let Some((c, ..)) = self.place {
                        useful[c] = true;
                    }
                }
                (loc, false) => {
                    if let Some((c, ..)) = self.pick_of(loc) {
                        useful[c] = true;
                    }
                }
            }
        }
        for (to, &u) in useful.iter().enumerate() {
            if !u || to == n.config {
                continue;
            }
            if let Some(c) = self.move_costs[n.config][to] {
                out.push((ActionInstance::move_to(self.configs[to], c), Node { config: to, ..*n }));
            }
        }
        if n.loc == Loc::Unknown {
            for (i, d) in self.detects.iter().enumerate() {
                if d.config != n.config {
                    continue;
                }
                let a = ActionInstance {
                    kind: ActionKind::Detect,
                    object: Some(object),
                    surface: Some(d.surface),
                    room: Some(d.room),
                    pose: Some(d.pose),
                    base: Some(d.view.base),
                    head: Some(d.view.head),
                    trajectory: d.view.trajectory.clone(),
                    cost: d.cost,
                };
                out.push((a, Node { loc: Loc::Binding(i), ..*n }));
            }
        }
        if !n.holding {
            if let Some((c, pose, surface)) = self.pick_of(n.loc) {
                if c == n.config {
                    let a = ActionInstance {
                        kind: ActionKind::Pick,
                        object: Some(object),
                        surface: Some(surface),
                        room: None,
                        pose: Some(pose),
                        base: Some(self.configs[c]),
                        head: None,
                        trajectory: Vec::new(),
                        cost: self.pick_cost,
                    };
                    out.push((a, Node { holding: true, ..*n }));
                }
            }
        } else if let Some((c, pose, surface, room)) = self.place {
            if c == n.config {
                let a = ActionInstance {
                    kind: ActionKind::Place,
                    object: Some(object),
                    surface: Some(surface),
                    room: Some(room),
                    pose: Some(pose),
                    base: Some(self.configs[c]),
                    head: None,
                    trajectory: Vec::new(),
                    cost: self.place_cost,
                };
                out.push((
                    a,
                    Node {
                        holding: false,
                        loc: Loc::Placed,
                        ..*n
                    },
                ));
            }
        }
        out
    }

    fn key(&self, a: &ActionInstance, next: &Node) -> ActionKey {
        let kind = match a.kind {
            ActionKind::Move => 0,
            ActionKind::Detect => 1,
            ActionKind::Pick => 2,
            ActionKind::Place => 3,
        };
        let surface = a.surface.map_or(self.config_surface[next.config], |s| s.index());
        (surface, next.config, kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub actions: Vec<ActionInstance>,
    pub cost: f64,
    pub expanded: usize,
}

struct Entry {
    cost: f64,
    len: usize,
    keys: Vec<ActionKey>,
    node: Node,
    plan: Vec<ActionInstance>,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.keys.cmp(&other.keys))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Planner {
    pub config: PlannerConfig,
    pub sensor: SensorConfig,
}

fn surface_seed(seed: u64, surface: SurfaceId) -> u64 {
    seed ^ (surface.index() as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Free point on the surface for putting an object down, center first.
fn placement_pose(env: &EnvironmentSpec, surface: SurfaceId) -> Pose2 {
    let fp = env.surface(surface).footprint;
    let c = fp.center();
    let offsets = [(0.0, 0.0), (-0.3, 0.0), (0.3, 0.0), (-0.45, 0.1), (0.45, -0.1)];
    for (dx, dy) in offsets {
        let p = fp.clamp(Point2::new(c.x + dx, c.y + dy));
        if !env.occluders.iter().any(|o| o.inflate(0.05).contains(p)) {
            return Pose2::new(p.x, p.y, 0.0);
        }
    }
    Pose2::new(c.x, c.y, 0.0)
}

impl Planner {
    pub fn new(config: PlannerConfig, sensor: SensorConfig) -> Self {
        Self { config, sensor }
    }

    /// Grounds the streams for one planning call. `seed` drives
    /// `sample-PoseB`; each surface gets its own derived stream so the
    /// candidate set does not depend on enumeration order.
    pub fn bind(
        &self,
        state: &SymbolicState,
        goal: Goal,
        belief: &HierarchicalBelief,
        env: &EnvironmentSpec,
        seed: u64,
    ) -> Result<PlanningProblem> {
        let target = goal.object();
        if belief.object() != target {
            return Err(PlanError::Contract("belief does not belong to the goal object".into()));
        }
        let mut configs = vec![state.base];
        let mut config_surface = vec![usize::MAX];
        let mut detects = Vec::new();
        let holding = state.holding == Some(target);
        let known = state.located.get(&target).copied();

        if known.is_none() && !holding {
            let mut ranked: Vec<(f64, SurfaceId)> = env
                .surfaces
                .iter()
                .map(|s| (belief.surface_marginal(s.id), s.id))
                .collect();
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            ranked.truncate(self.config.top_b);
            ranked.sort_by_key(|&(_, s)| s);
            for (_, s) in ranked {
                let room = env.surface(s).room;
                let mut rng = ChaCha8Rng::seed_from_u64(surface_seed(seed, s));
                let mut best: BTreeMap<usize, (f64, Pose2, ViewConfig)> = BTreeMap::new();
                for _ in 0..self.config.pose_samples {
                    let Ok(pb) = sample_pose_b(belief, s, &mut rng) else { break };
                    let Ok(views) = inverse_visibility(env, &self.sensor, &pb, s) else { continue };
                    for v in views {
                        let mask = surface_view_mask(env, &self.sensor, belief, s, &v);
                        if !mask.iter().any(|&m| m) {
                            continue;
                        }
                        let mass = belief.joint_belief_mass(room, s, &PoseRegion::Particles(mask))?;
                        if best.get(&v.slot).is_none_or(|(m, ..)| mass > *m) {
                            best.insert(v.slot, (mass, pb, v));
                        }
                    }
                }
                for (_, (mass, pb, view)) in best {
                    let config = configs.len();
                    configs.push(view.base);
                    config_surface.push(s.index());
                    let pick_config = inverse_reach(env, &pb, self.config.reach).map(|b| {
                        configs.push(b);
                        config_surface.push(s.index());
                        configs.len() - 1
                    });
                    detects.push(DetectBinding {
                        surface: s,
                        room,
                        pose: pb,
                        view,
                        mass,
                        cost: detect_cost(mass),
                        config,
                        pick_config,
                    });
                }
            }
        }

        let known = known.map(|(s, p)| {
            let c = inverse_reach(env, &p, self.config.reach).map(|b| {
                configs.push(b);
                config_surface.push(s.index());
                configs.len() - 1
            });
            (s, p, c)
        });

        let place = match goal {
            Goal::At(_, s) => {
                let pose = placement_pose(env, s);
                inverse_reach(env, &pose, self.config.reach).map(|b| {
                    configs.push(b);
                    config_surface.push(s.index());
                    (configs.len() - 1, pose, s, env.surface(s).room)
                })
            }
            Goal::Located(_) => None,
        };

        let n = configs.len();
        let mut move_costs = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    move_costs[i][j] = env
                        .nav_distance(configs[i].position(), configs[j].position())
                        .map(|d| (d * self.config.move_cost_per_meter).max(1e-6));
                }
            }
        }
        Ok(PlanningProblem {
            goal,
            configs,
            config_surface,
            detects,
            known,
            place,
            start_holding: holding,
            move_costs,
            pick_cost: self.config.pick_cost,
            place_cost: self.config.place_cost,
        })
    }

    /// Uniform-cost search; ties go to fewer actions, then the
    /// lexicographically smaller (surface, configuration, kind) sequence.
    pub fn search(&self, problem: &PlanningProblem) -> Result<PlanResult> {
        let mut heap = BinaryHeap::new();
        let mut closed = HashSet::new();
        heap.push(Reverse(Entry {
            cost: 0.0,
            len: 0,
            keys: Vec::new(),
            node: problem.initial(),
            plan: Vec::new(),
        }));
        let mut expanded = 0;
        while let Some(Reverse(e)) = heap.pop() {
            if !closed.insert(e.node) {
                continue;
            }
            if problem.is_goal(&e.node) {
                return Ok(PlanResult {
                    cost: e.cost,
                    actions: e.plan,
                    expanded,
                });
            }
            expanded += 1;
            if expanded > self.config.node_budget {
                return Err(PlanError::Budget(self.config.node_budget));
            }
            for (a, next) in problem.successors(&e.node, true) {
                if closed.contains(&next) {
                    continue;
                }
                let mut keys = e.keys.clone();
                keys.push(problem.key(&a, &next));
                let mut plan = e.plan.clone();
                let cost = e.cost + a.cost;
                plan.push(a);
                heap.push(Reverse(Entry {
                    cost,
                    len: e.len + 1,
                    keys,
                    node: next,
                    plan,
                }));
            }
        }
        Err(PlanError::NoPlan)
    }

    /// Grounds and searches.
    pub fn plan<R: Rng + ?Sized>(
        &self,
        state: &SymbolicState,
        goal: Goal,
        belief: &HierarchicalBelief,
        env: &EnvironmentSpec,
        rng: &mut R,
    ) -> Result<PlanResult> {
        let problem = self.bind(state, goal, belief, env, rng.random())?;
        self.search(&problem)
    }
}
