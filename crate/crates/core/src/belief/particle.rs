//! Occlusion-aware particle filter over planar object poses.
//!
//! Each surface holds its own particle set representing the pose given that
//! the object is on that surface. Per surface and per particle: the pose is
//! copied (objects are stationary), the weight is set from the Gaussian
//! measurement model when the target was detected, from the miss model
//! (visible particles drop to zero) otherwise, and in the miss case is further
//! scaled by the distance-based co-location weight for every co-located
//! detection. The set is then resampled multinomially with its own size.

use rand::Rng;

use super::{BeliefError, BeliefLevel, HierarchicalBelief, NoiseParams, ObservationEvent, Particle, Result, SimilarityMatrix};
use crate::geometry::Pose2;
use crate::ids::SurfaceId;

/// Unnormalised Gaussian measurement weight `exp(-d^2 / 2 sigma^2)`.
pub fn particle_weight_detected(particle_pose: &Pose2, observed_pose: &Pose2, sigma: f64) -> f64 {
    (-particle_pose.position().distance_sq(observed_pose.position()) / (2.0 * sigma * sigma)).exp()
}

/// Miss model: visible particles are ruled out, hidden ones keep their weight.
pub fn particle_weight_missed(particle_visible: bool, prior_weight: f64) -> f64 {
    if particle_visible {
        0.0
    } else {
        prior_weight
    }
}

/// Distance-based co-location weight in `[0, 1]`: similar objects pull the
/// particles towards the detection, dissimilar ones push them away.
pub fn particle_weight_colocated(distance_to_detected: f64, sim: f64, lambda: f64) -> f64 {
    let near = (-distance_to_detected / lambda).exp();
    (1.0 + sim) / 2.0 * near + (1.0 - sim) / 2.0 * (1.0 - near)
}

/// Draws `n` indices with probability proportional to `weights`, one uniform
/// variate per draw, by inverting the cumulative sum.
pub fn multinomial_resample<R: Rng + ?Sized>(weights: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let last = weights.len().saturating_sub(1);
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cumulative.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParticleStepSummary {
    /// Surfaces whose particles were reweighted and resampled.
    pub resampled: Vec<SurfaceId>,
    /// Surfaces left without particles (every weight went to zero).
    pub emptied: Vec<SurfaceId>,
}

enum WeightRule<'a> {
    Detected(&'a Pose2),
    Missed { colocated: Vec<(Pose2, f64)> },
}

impl HierarchicalBelief {
    /// One step of the occlusion-aware particle filter.
    ///
    /// Surfaces whose per-particle factors are all identical are skipped
    /// entirely (no resampling, no random draws). Fails without modifying the
    /// belief when every surface would be emptied.
    pub fn particle_filter_step<R: Rng + ?Sized>(
        &mut self,
        event: &ObservationEvent,
        sims: Option<&SimilarityMatrix>,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> Result<ParticleStepSummary> {
        let target = self.object();
        if event.target != target {
            return Err(BeliefError::Contract("event target does not match belief".into()));
        }
        let particles = self.all_particles();
        if event.seen_mask.len() != particles.len()
            || event.seen_mask.iter().zip(particles).any(|(m, p)| m.len() != p.len())
        {
            return Err(BeliefError::Contract("seen mask does not cover the particle set".into()));
        }

        let rule = match event.detection_of(target) {
            Some(d) => WeightRule::Detected(&d.pose),
            None => WeightRule::Missed {
                colocated: match sims {
                    Some(m) => event
                        .detections
                        .iter()
                        .filter(|d| d.object != target && m.colocation_enabled(d.object))
                        .map(|d| (d.pose, m.sim(d.object, target)))
                        .collect(),
                    None => Vec::new(),
                },
            },
        };

        let mut updated: Vec<Option<Vec<Particle>>> = Vec::with_capacity(particles.len());
        let mut summary = ParticleStepSummary::default();
        for (s, (set, mask)) in particles.iter().zip(&event.seen_mask).enumerate() {
            if set.is_empty() {
                updated.push(None);
                continue;
            }
            let factors: Vec<f64> = match &rule {
                WeightRule::Detected(z) => {
                    // log-domain per surface so distant surfaces do not underflow
                    let logs: Vec<f64> = set
                        .iter()
                        .map(|p| -p.pose.position().distance_sq(z.position()) / (2.0 * noise.sigma * noise.sigma))
                        .collect();
                    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    logs.iter().map(|l| (l - max).exp()).collect()
                }
                WeightRule::Missed { colocated } => set
                    .iter()
                    .zip(mask)
                    .map(|(p, &visible)| {
                        let mut f = particle_weight_missed(visible, 1.0);
                        for (pose, sim) in colocated {
                            f *= particle_weight_colocated(p.pose.distance(pose), *sim, noise.lambda);
                        }
                        f
                    })
                    .collect(),
            };
            if factors.windows(2).all(|w| w[0] == w[1]) && factors[0] > 0.0 {
                updated.push(None);
                continue;
            }
            let weights: Vec<f64> = set.iter().zip(&factors).map(|(p, f)| p.weight * f).collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                summary.emptied.push(SurfaceId(s));
                updated.push(Some(Vec::new()));
                continue;
            }
            let n = set.len();
            let w = 1.0 / n as f64;
            let resampled = multinomial_resample(&weights, n, rng)
                .into_iter()
                .map(|i| Particle { pose: set[i].pose, weight: w })
                .collect();
            summary.resampled.push(SurfaceId(s));
            updated.push(Some(resampled));
        }

        let survivors = updated
            .iter()
            .zip(particles)
            .filter(|(u, old)| match u {
                Some(new) => !new.is_empty(),
                None => !old.is_empty(),
            })
            .count();
        if survivors == 0 {
            return Err(BeliefError::Degenerate { level: BeliefLevel::Pose });
        }
        let slots = self.particles_mut();
        for (s, u) in updated.into_iter().enumerate() {
            if let Some(new) = u {
                slots[s] = new;
            }
        }
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_weight() {
        let a = Pose2::new(0.0, 0.0, 0.0);
        assert_eq!(particle_weight_detected(&a, &a, 0.1), 1.0);
        let b = Pose2::new(0.1, 0.0, 1.0);
        assert_abs_diff_eq!(particle_weight_detected(&a, &b, 0.1), (-0.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(particle_weight_detected(&a, &b, 0.1), 0.6065306597126334, epsilon = 1e-12);
        let mut last = 1.0;
        for i in 1..50 {
            let w = particle_weight_detected(&a, &Pose2::new(i as f64 * 0.01, 0.0, 0.0), 0.1);
            assert!(w < last);
            last = w;
        }
    }

    #[test]
    fn miss_weight() {
        assert_eq!(particle_weight_missed(true, 0.7), 0.0);
        assert_eq!(particle_weight_missed(false, 0.02), 0.02);
    }

    #[test]
    fn colocated_weight_limits() {
        assert_eq!(particle_weight_colocated(0.0, 1.0, 0.5), 1.0);
        assert_eq!(particle_weight_colocated(0.0, -1.0, 0.5), 0.0);
        assert_abs_diff_eq!(particle_weight_colocated(1e6, -1.0, 0.5), 1.0, epsilon = 1e-12);
        for d in [0.0, 0.3, 2.0, 50.0] {
            assert_eq!(particle_weight_colocated(d, 0.0, 0.7), 0.5);
        }
    }

    #[test]
    fn resample_never_picks_zero_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let idx = multinomial_resample(&[0.0, 1.0, 0.0, 2.0, 0.0], 1000, &mut rng);
        assert!(idx.iter().all(|&i| i == 1 || i == 3));
        let threes = idx.iter().filter(|&&i| i == 3).count() as f64 / 1000.0;
        assert!((threes - 2.0 / 3.0).abs() < 0.05);
    }
}
