use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{EnvironmentSpec, Result};
use crate::belief::{Detection, HierarchicalBelief, NoiseParams, ObservationEvent, SeenMask, VisibilityReport};
use crate::geometry::{wrap_angle, Point2, Pose2};
use crate::ids::{ObjectId, SurfaceId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Half-angle of the head camera cone, radians.
    pub half_angle: f64,
    /// Maximum sensing range, meters.
    pub range: f64,
    /// Head pan offsets swept by one detect, relative to the commanded pan.
    pub sweep: Vec<f64>,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            half_angle: 45f64.to_radians(),
            range: 3.5,
            sweep: vec![-15f64.to_radians(), 0.0, 15f64.to_radians()],
        }
    }
}

impl SensorConfig {
    /// Absolute head pans visited when the head is commanded to `pan`.
    pub fn trajectory(&self, pan: f64) -> Vec<f64> {
        self.sweep.iter().map(|d| wrap_angle(pan + d)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub base: Pose2,
    /// Head pan relative to the base heading.
    pub head_pan: f64,
    pub holding: Option<ObjectId>,
}

impl RobotState {
    pub fn at(base: Pose2) -> Self {
        Self {
            base,
            head_pan: 0.0,
            holding: None,
        }
    }

    pub fn gaze(&self) -> f64 {
        wrap_angle(self.base.yaw + self.head_pan)
    }
}

/// Whether `p` lies inside the cone looking along `heading` from `eye` and
/// the straight ray to it crosses no wall or occluder.
pub fn point_visible(env: &EnvironmentSpec, sensor: &SensorConfig, eye: Point2, heading: f64, p: Point2) -> bool {
    let d = eye.distance(p);
    if d > sensor.range {
        return false;
    }
    if d > 1e-12 && wrap_angle(eye.bearing_to(p) - heading).abs() > sensor.half_angle {
        return false;
    }
    env.line_of_sight(eye, p)
}

/// Per-particle visibility from the robot's current head pan.
pub fn visible_particles(
    env: &EnvironmentSpec,
    sensor: &SensorConfig,
    robot: &RobotState,
    belief: &HierarchicalBelief,
) -> SeenMask {
    let eye = robot.base.position();
    let heading = robot.gaze();
    belief
        .all_particles()
        .iter()
        .map(|set| {
            set.iter()
                .map(|p| point_visible(env, sensor, eye, heading, p.pose.position()))
                .collect()
        })
        .collect()
}

/// Union of the particle masks over every waypoint of a head sweep.
pub fn sweep_mask(
    env: &EnvironmentSpec,
    sensor: &SensorConfig,
    base: &Pose2,
    trajectory: &[f64],
    belief: &HierarchicalBelief,
) -> SeenMask {
    let mut mask: SeenMask = belief.all_particles().iter().map(|s| vec![false; s.len()]).collect();
    for &pan in trajectory {
        let robot = RobotState {
            base: *base,
            head_pan: pan,
            holding: None,
        };
        for (m, v) in mask.iter_mut().zip(visible_particles(env, sensor, &robot, belief)) {
            for (a, b) in m.iter_mut().zip(v) {
                *a |= b;
            }
        }
    }
    mask
}

/// Source of the detector's random coins. Scripted sources make scenario
/// runs exactly reproducible.
pub trait NoiseSource: Send {
    /// True when a visible object is missed.
    fn false_negative(&mut self, object: ObjectId, p_fn: f64) -> bool;
    /// True when a spurious detection fires on `surface`.
    fn false_positive(&mut self, surface: SurfaceId, p: f64) -> bool;
    /// Standard normal draw for pose noise.
    fn gaussian(&mut self) -> f64;
    /// Uniform draw in `[0, n)`.
    fn index(&mut self, n: usize) -> usize;
}

#[derive(Debug, Clone)]
pub struct RandomNoise {
    rng: ChaCha8Rng,
}

impl RandomNoise {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self { rng }
    }
}

impl NoiseSource for RandomNoise {
    fn false_negative(&mut self, _object: ObjectId, p_fn: f64) -> bool {
        self.rng.random::<f64>() < p_fn
    }

    fn false_positive(&mut self, _surface: SurfaceId, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Pre-drawn coins: false negatives are consumed in order from a queue (an
/// exhausted queue means "no miss"), false positives never fire and pose
/// noise is zero.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptedNoise {
    pub false_negatives: VecDeque<bool>,
}

impl ScriptedNoise {
    pub fn new(false_negatives: impl IntoIterator<Item = bool>) -> Self {
        Self {
            false_negatives: false_negatives.into_iter().collect(),
        }
    }
}

impl NoiseSource for ScriptedNoise {
    fn false_negative(&mut self, _object: ObjectId, _p_fn: f64) -> bool {
        self.false_negatives.pop_front().unwrap_or(false)
    }

    fn false_positive(&mut self, _surface: SurfaceId, _p: f64) -> bool {
        false
    }

    fn gaussian(&mut self) -> f64 {
        0.0
    }

    fn index(&mut self, _n: usize) -> usize {
        0
    }
}

/// Output of one detect sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub target: ObjectId,
    pub seen_mask: SeenMask,
    pub visibility: VisibilityReport,
    pub detections: Vec<Detection>,
}

impl DetectionResult {
    pub fn target_detected(&self) -> bool {
        self.detections.iter().any(|d| d.object == self.target)
    }

    pub fn to_event(&self) -> Result<ObservationEvent> {
        Ok(ObservationEvent::new(
            self.target,
            self.visibility.clone(),
            self.detections.clone(),
            self.seen_mask.clone(),
        )?)
    }
}

/// Simulated detector for one head sweep from `base`.
///
/// Every object whose true pose is visible from some waypoint is reported
/// with probability `1 - p_fn` (one coin per object per sweep) at its true
/// pose plus Gaussian noise, clamped onto its surface. For the target, each
/// other surface with visibility `v_s > 0` fires a spurious detection with
/// probability `p_fp * v_s`, placed at one of the surface's seen particles.
#[allow(clippy::too_many_arguments)]
pub fn sense(
    env: &EnvironmentSpec,
    sensor: &SensorConfig,
    base: &Pose2,
    trajectory: &[f64],
    object_poses: &[Option<(SurfaceId, Pose2)>],
    belief: &HierarchicalBelief,
    noise: &NoiseParams,
    source: &mut dyn NoiseSource,
) -> Result<DetectionResult> {
    let target = belief.object();
    let seen_mask = sweep_mask(env, sensor, base, trajectory, belief);
    let eye = base.position();
    let visible_now = |p: Point2| {
        trajectory
            .iter()
            .any(|&pan| point_visible(env, sensor, eye, wrap_angle(base.yaw + pan), p))
    };

    let mut detections = Vec::new();
    for (i, placement) in object_poses.iter().enumerate() {
        let Some((surface, pose)) = placement else { continue };
        let object = ObjectId(i);
        if !visible_now(pose.position()) {
            continue;
        }
        if source.false_negative(object, noise.p_fn) {
            continue;
        }
        let fp = env.surface(*surface).footprint;
        let noisy = Point2::new(
            pose.x + noise.sigma * source.gaussian(),
            pose.y + noise.sigma * source.gaussian(),
        );
        let p = fp.clamp(noisy);
        detections.push(Detection {
            object,
            pose: Pose2::new(p.x, p.y, pose.yaw),
            surface: *surface,
        });
    }

    let mut seen_counts: Vec<usize> = seen_mask.iter().map(|m| m.iter().filter(|&&b| b).count()).collect();
    let initial = belief.initial_particle_counts().to_vec();
    let v_s = |counts: &[usize], s: usize| counts[s] as f64 / initial[s].max(1) as f64;

    if !detections.iter().any(|d| d.object == target) {
        // spurious reports only on surfaces the target is not on, so a
        // surface's report rate is (1 - p_fn) v when it holds the target
        // and p_fp v otherwise
        let true_surface = object_poses.get(target.index()).copied().flatten().map(|(s, _)| s.index());
        #[allow(clippy::needless_range_loop)]
        for s in 0..seen_counts.len() {
            let v = v_s(&seen_counts, s);
            if Some(s) == true_surface || v <= 0.0 || !source.false_positive(SurfaceId(s), noise.p_fp * v) {
                continue;
            }
            let seen: Vec<_> = belief.all_particles()[s]
                .iter()
                .zip(&seen_mask[s])
                .filter(|(_, &m)| m)
                .map(|(p, _)| p.pose)
                .collect();
            let pose = seen[source.index(seen.len())];
            detections.push(Detection {
                object: target,
                pose,
                surface: SurfaceId(s),
            });
            break;
        }
    }

    // a detection must lie in the observed region; a true object can be
    // visible on a surface none of whose particles were seen
    for d in &detections {
        let s = d.surface.index();
        if seen_counts[s] == 0 {
            seen_counts[s] = 1.min(initial[s]);
        }
    }
    let visibility = VisibilityReport::from_counts(belief.room_surfaces(), seen_counts, initial)?;
    // drop anything still outside the observed region (surface with no particles at all)
    detections.retain(|d| visibility.v_surface()[d.surface.index()] > 0.0);
    Ok(DetectionResult {
        target,
        seen_mask,
        visibility,
        detections,
    })
}
