//! A table partly hidden by a floor box, observed repeatedly from one pose.

use belief_tamp::belief::{HierarchicalBelief, NoiseParams, Particle};
use belief_tamp::geometry::{Pose2, Rect};
use belief_tamp::sim::{point_visible, sense, EnvBuilder, EnvironmentSpec, RandomNoise, SensorConfig};
use belief_tamp::{ObjectId, SurfaceId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TRIALS: usize = 10_000;
const EYE: (f64, f64) = (1.5, 3.0);

/// A table whose lower half is hidden from the robot by a floor box, and a
/// shelf behind the robot.
fn env() -> EnvironmentSpec {
    let mut b = EnvBuilder::new();
    let r = b.room("room", Rect::new(0.0, 0.0, 6.0, 6.0));
    let table = b.surface("table", r, Rect::new(3.0, 2.5, 4.0, 3.5));
    b.surface("shelf", r, Rect::new(0.2, 0.2, 1.0, 0.6));
    b.occluder(Rect::new(2.6, 2.3, 2.7, 3.0));
    b.object("apple", table, Pose2::new(3.5, 3.2, 0.0));
    b.build().unwrap()
}

/// Four table particles of which `visible` are in view.
fn belief(env: &EnvironmentSpec, visible: usize) -> HierarchicalBelief {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut b = HierarchicalBelief::init_uniform(env, ObjectId(0), 4, &mut rng).unwrap();
    let seen = [(3.3, 3.2), (3.5, 3.3), (3.7, 3.2), (3.9, 3.4)];
    let hidden = [(3.3, 2.7), (3.5, 2.6), (3.7, 2.8), (3.9, 2.7)];
    let set = (0..4)
        .map(|i| {
            let (x, y) = if i < visible { seen[i] } else { hidden[i] };
            Particle { pose: Pose2::new(x, y, 0.0), weight: 0.25 }
        })
        .collect();
    b.set_particles(SurfaceId(0), set).unwrap();
    b
}

pub fn within_3_sigma(hits: usize, p: f64) -> bool {
    let freq = hits as f64 / TRIALS as f64;
    let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
    (freq - p).abs() <= 3.0 * sigma
}

/// Detection count of the target on the table over all trials, and the
/// visibility reported to the estimator.
pub fn run(visible: usize, target_on_table: bool) -> (usize, f64) {
    let env = env();
    let sensor = SensorConfig::default();
    let noise = NoiseParams::default();
    let b = belief(&env, visible);
    let eye = Pose2::new(EYE.0, EYE.1, 0.0);
    for p in b.particles(SurfaceId(0)) {
        let seen = point_visible(&env, &sensor, eye.position(), 0.0, p.pose.position());
        assert_eq!(seen, p.pose.y > 3.0, "fixture geometry at {:?}", p.pose);
    }
    let mut pick = ChaCha8Rng::seed_from_u64(7 + visible as u64);
    let mut coins = RandomNoise::new(ChaCha8Rng::seed_from_u64(11 + visible as u64 + 100 * target_on_table as u64));
    let mut hits = 0;
    let mut v = 0.0;
    for _ in 0..TRIALS {
        // the object sits at a pose drawn from the belief
        let placement = if target_on_table {
            let i = pick.random_range(0..4);
            (SurfaceId(0), b.particles(SurfaceId(0))[i].pose)
        } else {
            (SurfaceId(1), Pose2::new(0.6, 0.4, 0.0))
        };
        let res = sense(&env, &sensor, &eye, &[0.0], &[Some(placement)], &b, &noise, &mut coins).unwrap();
        v = res.visibility.v_surface()[0];
        if res.detections.iter().any(|d| d.object == ObjectId(0) && d.surface == SurfaceId(0)) {
            hits += 1;
        }
    }
    (hits, v)
}
