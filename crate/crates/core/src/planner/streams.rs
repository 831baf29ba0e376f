use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PlanError, Result};
use crate::belief::HierarchicalBelief;
use crate::geometry::{Point2, Pose2};
use crate::ids::SurfaceId;
use crate::sim::{point_visible, EnvironmentSpec, SensorConfig};

/// Lower bound on the joint belief mass in the detect cost.
pub const DETECT_COST_FLOOR: f64 = 1e-4;

/// Distance from a surface edge to its viewing positions.
const VIEW_STANDOFF: f64 = 0.7;

/// `1 / max(mass, floor)`: the detect action's unit cost scaled by how
/// unlikely the object is to be where the detect looks.
pub fn detect_cost(mass: f64) -> f64 {
    1.0 / mass.max(DETECT_COST_FLOOR)
}

/// Draws a particle pose of `surface` in proportion to its weight.
pub fn sample_pose_b<R: Rng + ?Sized>(belief: &HierarchicalBelief, surface: SurfaceId, rng: &mut R) -> Result<Pose2> {
    let set = belief.particles(surface);
    let total: f64 = set.iter().map(|p| p.weight).sum();
    if set.is_empty() || !(total > 0.0) {
        return Err(PlanError::StreamExhausted(format!("no particle mass on {surface}")));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for p in set {
        acc += p.weight;
        if u < acc {
            return Ok(p.pose);
        }
    }
    Ok(set.iter().rev().find(|p| p.weight > 0.0).expect("positive mass").pose)
}

/// Base pose, head pan and head sweep certifying that a pose can be seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewConfig {
    pub base: Pose2,
    pub head: f64,
    pub trajectory: Vec<f64>,
    /// Candidate slot around the surface, stable across calls.
    pub slot: usize,
    /// An occluder lies on the ray to the pose.
    pub occluded: bool,
}

fn view_slots(env: &EnvironmentSpec, surface: SurfaceId) -> Vec<Point2> {
    let fp = env.surface(surface).footprint;
    let c = fp.center();
    let d = VIEW_STANDOFF;
    let diag = d / std::f64::consts::SQRT_2;
    vec![
        Point2::new(c.x, fp.max.y + d),
        Point2::new(c.x, fp.min.y - d),
        Point2::new(fp.min.x - d, c.y),
        Point2::new(fp.max.x + d, c.y),
        Point2::new(fp.min.x - diag, fp.max.y + diag),
        Point2::new(fp.max.x + diag, fp.max.y + diag),
        Point2::new(fp.min.x - diag, fp.min.y - diag),
        Point2::new(fp.max.x + diag, fp.min.y - diag),
    ]
}

/// Viewing configurations for `pose` on `surface`: free base positions in
/// the surface's room around the footprint, within range, with no wall on
/// the ray. Candidates whose ray crosses an occluder are kept but ordered
/// after the clear ones.
pub fn inverse_visibility(
    env: &EnvironmentSpec,
    sensor: &SensorConfig,
    pose: &Pose2,
    surface: SurfaceId,
) -> Result<Vec<ViewConfig>> {
    let room = env.surface(surface).room;
    if !env.room_reachable(room) {
        return Err(PlanError::StreamExhausted(format!("{room} is not on the navigation graph")));
    }
    let target = pose.position();
    let mut out = Vec::new();
    for (slot, p) in view_slots(env, surface).into_iter().enumerate() {
        if !env.is_free(p) || env.room_at(p) != Some(room) || p.distance(target) > sensor.range {
            continue;
        }
        if !env.walls_clear(p, target) {
            continue;
        }
        let base = Pose2::new(p.x, p.y, p.bearing_to(target));
        out.push(ViewConfig {
            base,
            head: 0.0,
            trajectory: sensor.trajectory(0.0),
            slot,
            occluded: !point_visible(env, sensor, p, base.yaw, target),
        });
    }
    if out.is_empty() {
        return Err(PlanError::StreamExhausted(format!("no viewing configuration for {surface}")));
    }
    out.sort_by_key(|v| (v.occluded, v.slot));
    Ok(out)
}

/// Free base pose within `reach` of `pose`, in the same room, facing it.
/// Prefers the candidate closest to the room center.
pub fn inverse_reach(env: &EnvironmentSpec, pose: &Pose2, reach: f64) -> Option<Pose2> {
    let target = pose.position();
    let room = env.room_at(target)?;
    let center = env.room(room).footprint.center();
    let mut best: Option<(f64, Point2)> = None;
    for k in 0..4 {
        let r = reach * (0.55 + 0.13 * k as f64);
        if r > reach {
            break;
        }
        for i in 0..16 {
            let a = i as f64 * std::f64::consts::PI / 8.0;
            let p = Point2::new(target.x + r * a.cos(), target.y + r * a.sin());
            if !env.is_free(p) || env.room_at(p) != Some(room) {
                continue;
            }
            let score = p.distance(center);
            if best.is_none_or(|(s, _)| score < s - 1e-12) {
                best = Some((score, p));
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|(_, p)| Pose2::new(p.x, p.y, p.bearing_to(target)))
}

/// Which particles of `surface` a head sweep from `view` would see.
pub fn surface_view_mask(
    env: &EnvironmentSpec,
    sensor: &SensorConfig,
    belief: &HierarchicalBelief,
    surface: SurfaceId,
    view: &ViewConfig,
) -> Vec<bool> {
    let eye = view.base.position();
    belief
        .particles(surface)
        .iter()
        .map(|p| {
            view.trajectory.iter().any(|&pan| {
                point_visible(
                    env,
                    sensor,
                    eye,
                    crate::geometry::wrap_angle(view.base.yaw + pan),
                    p.pose.position(),
                )
            })
        })
        .collect()
}
