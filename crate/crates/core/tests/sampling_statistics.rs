use belief_tamp::belief::{multinomial_resample, HierarchicalBelief, Particle};
use belief_tamp::geometry::{Pose2, Rect};
use belief_tamp::planner::sample_pose_b;
use belief_tamp::sim::{EnvBuilder, EnvironmentSpec};
use belief_tamp::{ObjectId, SurfaceId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const TABLE: (f64, f64, f64, f64) = (2.0, 1.0, 3.6, 1.8);

fn env() -> EnvironmentSpec {
    let mut b = EnvBuilder::new();
    let r = b.room("kitchen", Rect::new(0.0, 0.0, 6.0, 6.0));
    let t = b.surface("table", r, Rect::new(TABLE.0, TABLE.1, TABLE.2, TABLE.3));
    b.object("apple", t, Pose2::new(2.5, 1.5, 0.0));
    b.build().unwrap()
}

/// Asymptotic Kolmogorov distribution tail with the usual small-sample
/// correction of the statistic.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

fn ks_uniform(mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    ks_p_value(d, xs.len())
}

#[test]
fn sampled_poses_are_uniform_over_the_footprint() {
    let env = env();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let belief = HierarchicalBelief::init_uniform(&env, ObjectId(0), 4000, &mut rng).unwrap();
    let draws: Vec<Pose2> = (0..1000).map(|_| sample_pose_b(&belief, SurfaceId(0), &mut rng).unwrap()).collect();
    let px = ks_uniform(draws.iter().map(|p| p.x).collect(), TABLE.0, TABLE.2);
    let py = ks_uniform(draws.iter().map(|p| p.y).collect(), TABLE.1, TABLE.3);
    assert!(px > 0.01 && py > 0.01, "KS p-values x={px} y={py}");
    // and the test does reject a clearly non-uniform sample
    let skewed: Vec<f64> = draws.iter().map(|p| TABLE.0 + (p.x - TABLE.0).powi(2) / (TABLE.2 - TABLE.0)).collect();
    assert!(ks_uniform(skewed, TABLE.0, TABLE.2) < 0.01);
}

#[test]
fn point_mass_and_exhaustion() {
    let env = env();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut belief = HierarchicalBelief::init_uniform(&env, ObjectId(0), 5, &mut rng).unwrap();
    let at = Pose2::new(3.0, 1.2, 0.0);
    let set = (0..5)
        .map(|i| Particle { pose: if i == 2 { at } else { Pose2::new(2.1, 1.1, 0.0) }, weight: if i == 2 { 1.0 } else { 0.0 } })
        .collect();
    belief.set_particles(SurfaceId(0), set).unwrap();
    for _ in 0..100 {
        assert_eq!(sample_pose_b(&belief, SurfaceId(0), &mut rng).unwrap(), at);
    }
    belief.set_particles(SurfaceId(0), Vec::new()).unwrap();
    assert!(sample_pose_b(&belief, SurfaceId(0), &mut rng).is_err());
}

#[test]
fn multinomial_resampling_matches_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..5 {
        let k = 8 + trial;
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..3.0)).collect();
        let total: f64 = weights.iter().sum();
        let n = 20_000;
        let mut counts = vec![0usize; k];
        for i in multinomial_resample(&weights, n, &mut rng) {
            counts[i] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&weights)
            .map(|(&c, w)| {
                let e = n as f64 * w / total;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        let p = 1.0 - ChiSquared::new((k - 1) as f64).unwrap().cdf(chi2);
        assert!(p > 0.001, "trial {trial}: chi2={chi2} p={p}");
    }
}
