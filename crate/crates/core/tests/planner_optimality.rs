//! Uniform-cost search against exhaustive enumeration of every action
//! sequence of up to four steps on desk-scale fixtures.

mod support;

use belief_tamp::belief::HierarchicalBelief;
use belief_tamp::geometry::Pose2;
use belief_tamp::planner::{ActionKind, Goal, Planner, SymbolicState};
use belief_tamp::{ObjectId, RoomId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::optimality::{check_fixture, exhaustive, fixture, HORIZON};

#[test]
fn search_cost_equals_exhaustive_optimum() {
    let planner = Planner::default();
    let mut compared = 0;
    for seed in 0..150u64 {
        if check_fixture(&planner, seed).unwrap() {
            compared += 1;
        }
    }
    assert!(compared >= 100, "only {compared} fixtures within the horizon");
}

#[test]
fn peaked_surface_is_searched_first() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let env = fixture(&mut rng);
    let mut belief = HierarchicalBelief::init_uniform(&env, ObjectId(0), 20, &mut rng).unwrap();
    // 0.9 on the other room's first surface, far from the start
    let target = env.room_surfaces()[1][0];
    belief.set_room_belief(vec![0.1, 0.9]).unwrap();
    let n = belief.surface_belief(RoomId(1)).len();
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    belief.set_surface_belief(RoomId(1), p).unwrap();
    let planner = Planner::default();
    let problem =
        planner.bind(&SymbolicState::new(Pose2::new(3.0, 3.0, 0.0)), Goal::Located(ObjectId(0)), &belief, &env, 1).unwrap();
    let plan = planner.search(&problem).unwrap();
    let detect = plan.actions.iter().find(|a| a.kind == ActionKind::Detect).unwrap();
    assert_eq!(detect.surface, Some(target));
    assert_eq!(exhaustive(&problem, problem.initial(), HORIZON).unwrap(), plan.cost);
}

#[test]
fn goal_already_holding_gives_empty_plan() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let env = fixture(&mut rng);
    let belief = HierarchicalBelief::init_uniform(&env, ObjectId(0), 20, &mut rng).unwrap();
    let mut state = SymbolicState::new(Pose2::new(3.0, 3.0, 0.0));
    let at = env.objects[0].pose;
    state.located.insert(ObjectId(0), (env.objects[0].surface, at));
    let planner = Planner::default();
    let plan = planner
        .plan(&state, Goal::At(ObjectId(0), env.objects[0].surface), &belief, &env, &mut rng)
        .unwrap();
    assert!(plan.actions.is_empty());
    assert_eq!(plan.cost, 0.0);
}
