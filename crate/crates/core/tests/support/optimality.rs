//! Two-room desk-scale planning fixtures and exhaustive enumeration of every
//! action sequence up to a fixed horizon.

use belief_tamp::belief::HierarchicalBelief;
use belief_tamp::geometry::{Pose2, Rect};
use belief_tamp::planner::{Goal, Node, Planner, PlanningProblem, SymbolicState};
use belief_tamp::sim::{EnvBuilder, EnvironmentSpec};
use belief_tamp::{ObjectId, RoomId, SurfaceId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HORIZON: usize = 4;

pub fn fixture(rng: &mut ChaCha8Rng) -> EnvironmentSpec {
    let mut b = EnvBuilder::new();
    let a = b.room("kitchen", Rect::new(0.0, 0.0, 6.0, 6.0));
    let c = b.room("living_room", Rect::new(6.0, 0.0, 12.0, 6.0));
    b.door(a, c, 1.0);
    // up to three surfaces, at least one per room, in fixed corner slots
    let slots = [(a, 0.6, 0.6), (a, 4.2, 4.8), (c, 10.2, 0.6), (c, 6.6, 4.8)];
    let n = rng.random_range(2..=3);
    let mut picked = vec![0, 2];
    if n == 3 {
        picked.push(if rng.random_bool(0.5) { 1 } else { 3 });
    }
    let mut first = None;
    for (i, &k) in picked.iter().enumerate() {
        let (room, x, y) = slots[k];
        let s = b.surface(format!("s{i}"), room, Rect::new(x, y, x + 1.2, y + 0.6));
        first.get_or_insert((s, x, y));
    }
    let (s, x, y) = first.unwrap();
    b.object("apple", s, Pose2::new(x + 0.6, y + 0.3, 0.0));
    b.build().unwrap()
}

pub fn random_belief(env: &EnvironmentSpec, rng: &mut ChaCha8Rng) -> HierarchicalBelief {
    let mut belief = HierarchicalBelief::init_uniform(env, ObjectId(0), 20, rng).unwrap();
    let dist = |rng: &mut ChaCha8Rng, n: usize| {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0f64).powi(2)).collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect::<Vec<_>>()
    };
    belief.set_room_belief(dist(rng, 2)).unwrap();
    for r in 0..2 {
        let n = belief.surface_belief(RoomId(r)).len();
        belief.set_surface_belief(RoomId(r), dist(rng, n)).unwrap();
    }
    belief
}

/// Cheapest goal-reaching sequence of at most `depth` actions.
pub fn exhaustive(p: &PlanningProblem, n: Node, depth: usize) -> Option<f64> {
    if p.is_goal(&n) {
        return Some(0.0);
    }
    if depth == 0 {
        return None;
    }
    p.successors(&n, false)
        .into_iter()
        .filter_map(|(a, next)| exhaustive(p, next, depth - 1).map(|c| c + a.cost))
        .min_by(f64::total_cmp)
}

/// Plans one random fixture and compares against the exhaustive optimum.
/// `Ok(true)` when the plan is within the horizon and optimal, `Ok(false)`
/// when it is longer (only the exhaustive bound is checked then).
pub fn check_fixture(planner: &Planner, seed: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let env = fixture(&mut rng);
    let belief = random_belief(&env, &mut rng);
    let start = if rng.random_bool(0.5) { Pose2::new(3.0, 3.0, 0.0) } else { Pose2::new(9.0, 3.0, 0.0) };
    let goal = match rng.random_range(0..3) {
        0 => Goal::Located(ObjectId(0)),
        k => Goal::At(ObjectId(0), SurfaceId(k.min(env.surfaces.len() - 1))),
    };
    let problem = planner.bind(&SymbolicState::new(start), goal, &belief, &env, rng.random()).map_err(|e| e.to_string())?;
    let best = exhaustive(&problem, problem.initial(), HORIZON);
    let plan = match planner.search(&problem) {
        Ok(p) => p,
        Err(_) if best.is_none() => return Ok(false),
        Err(e) => return Err(format!("seed {seed}: search failed ({e}) but a {HORIZON}-step plan exists")),
    };

    // cost coherence and applicability
    let sum: f64 = plan.actions.iter().map(|a| a.cost).sum();
    if (sum - plan.cost).abs() >= 1e-9 || plan.actions.iter().any(|a| a.cost <= 0.0) {
        return Err(format!("seed {seed}: incoherent costs"));
    }
    // distinct configurations can share a pose, so track every node the
    // action sequence can lead to
    let mut nodes = vec![problem.initial()];
    for a in &plan.actions {
        nodes = nodes
            .iter()
            .flat_map(|n| problem.successors(n, false))
            .filter(|(b, _)| b == a)
            .map(|(_, n)| n)
            .collect();
        if nodes.is_empty() {
            return Err(format!("seed {seed}: inapplicable {a:?}"));
        }
    }
    if !nodes.iter().any(|n| problem.is_goal(n)) {
        return Err(format!("seed {seed}: plan does not reach the goal"));
    }
    if let Some(best) = best {
        if plan.cost > best + 1e-9 {
            return Err(format!("seed {seed}: search {} > exhaustive {best}", plan.cost));
        }
    }
    if plan.actions.len() > HORIZON {
        return Ok(false);
    }
    match best {
        Some(best) if (plan.cost - best).abs() < 1e-9 => Ok(true),
        Some(best) => Err(format!("seed {seed}: search {} vs exhaustive {best}", plan.cost)),
        None => Err(format!("seed {seed}: {}-step plan missed by enumeration", plan.actions.len())),
    }
}
