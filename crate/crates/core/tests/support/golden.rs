//! Ten-particle scripted trace of the occlusion-aware particle filter, with a
//! line-by-line reference transcription of the algorithm.

use belief_tamp::belief::{
    Detection, HierarchicalBelief, NoiseParams, ObservationEvent, Particle, SimilarityMatrix, VisibilityReport,
};
use belief_tamp::geometry::{Pose2, Rect};
use belief_tamp::sim::{EnvBuilder, EnvironmentSpec};
use belief_tamp::{ObjectId, SurfaceId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const N: usize = 10;
pub const SEED: u64 = 42;
const SIM: f64 = 0.6;

/// Final multiset after the three scripted steps, sorted.
pub const GOLDEN: [(f64, f64); N] = [
    (2.55, 2.5),
    (2.55, 2.5),
    (2.55, 2.5),
    (2.55, 2.5),
    (2.55, 2.5),
    (2.55, 2.5),
    (2.55, 2.5),
    (2.55, 2.5),
    (2.75, 2.66),
    (2.75, 2.66),
];

fn env() -> EnvironmentSpec {
    let mut b = EnvBuilder::new();
    let r = b.room("kitchen", Rect::new(0.0, 0.0, 6.0, 6.0));
    let t = b.surface("table", r, Rect::new(2.0, 2.0, 3.0, 3.0));
    b.object("apple", t, Pose2::new(2.7, 2.6, 0.0));
    b.object("banana", t, Pose2::new(2.9, 2.9, 0.0));
    b.build().unwrap()
}

fn initial() -> Vec<(f64, f64)> {
    (0..N).map(|i| (2.05 + 0.1 * i as f64, 2.1 + 0.08 * i as f64)).collect()
}

struct Step {
    seen: [bool; N],
    apple: Option<(f64, f64)>,
    banana: Option<(f64, f64)>,
}

fn script() -> Vec<Step> {
    vec![
        // partial view, apple missed, banana seen in the far corner
        Step {
            seen: [true, true, true, false, false, false, false, false, false, false],
            apple: None,
            banana: Some((2.9, 2.9)),
        },
        // a second partial miss with nothing else reported
        Step {
            seen: [false, false, false, false, true, true, false, false, false, false],
            apple: None,
            banana: None,
        },
        // apple detected
        Step { seen: [true; N], apple: Some((2.7, 2.6)), banana: None },
    ]
}

fn noise() -> NoiseParams {
    NoiseParams { sigma: 0.2, lambda: 1.0, ..NoiseParams::default() }
}

/// Direct transcription: copy poses, weight by the detect / co-located miss /
/// miss rule, then N draws each proportional to the weights.
pub fn reference(seed: u64) -> Vec<(f64, f64)> {
    let n = noise();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = initial();
    for step in script() {
        let mut w = [0.0; N];
        for i in 0..N {
            let (x, y) = xs[i];
            w[i] = if let Some((ax, ay)) = step.apple {
                let d2 = (x - ax).powi(2) + (y - ay).powi(2);
                (-d2 / (2.0 * n.sigma * n.sigma)).exp()
            } else {
                let miss = if step.seen[i] { 0.0 } else { 1.0 / N as f64 };
                match step.banana {
                    Some((bx, by)) => {
                        let d = ((x - bx).powi(2) + (y - by).powi(2)).sqrt();
                        let e = (-d / n.lambda).exp();
                        miss * ((1.0 + SIM) / 2.0 * e + (1.0 - SIM) / 2.0 * (1.0 - e))
                    }
                    None => miss,
                }
            };
        }
        let total: f64 = w.iter().sum();
        let mut next = Vec::with_capacity(N);
        for _ in 0..N {
            let u = rng.random::<f64>();
            let mut acc = 0.0;
            let mut pick = N - 1;
            for (j, wj) in w.iter().enumerate() {
                acc += wj / total;
                if u < acc {
                    pick = j;
                    break;
                }
            }
            next.push(xs[pick]);
        }
        xs = next;
    }
    xs
}

pub fn library(seed: u64) -> Vec<(f64, f64)> {
    let env = env();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut belief = HierarchicalBelief::init_uniform(&env, ObjectId(0), N, &mut rng).unwrap();
    let set = initial()
        .into_iter()
        .map(|(x, y)| Particle { pose: Pose2::new(x, y, 0.0), weight: 1.0 / N as f64 })
        .collect();
    belief.set_particles(SurfaceId(0), set).unwrap();
    let sims = SimilarityMatrix::new(vec![vec![1.0, SIM], vec![SIM, 1.0]], vec![true, true]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for step in script() {
        let mask = vec![step.seen.to_vec()];
        let seen = step.seen.iter().filter(|&&b| b).count();
        let vis = VisibilityReport::from_counts(&env.room_surfaces(), vec![seen], vec![N]).unwrap();
        let mut detections = Vec::new();
        for (o, at) in [(0, step.apple), (1, step.banana)] {
            if let Some((x, y)) = at {
                detections.push(Detection { object: ObjectId(o), pose: Pose2::new(x, y, 0.0), surface: SurfaceId(0) });
            }
        }
        let event = ObservationEvent::new(ObjectId(0), vis, detections, mask).unwrap();
        let summary = belief.particle_filter_step(&event, Some(&sims), &noise(), &mut rng).unwrap();
        assert_eq!(summary.resampled, vec![SurfaceId(0)]);
    }
    belief.particles(SurfaceId(0)).iter().map(|p| (p.pose.x, p.pose.y)).collect()
}

pub fn sorted(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}
