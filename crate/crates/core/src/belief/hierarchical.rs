use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BeliefError, BeliefLevel, Result};
use crate::geometry::{Pose2, Rect};
use crate::ids::{ObjectId, RoomId, SurfaceId};
use crate::sim::EnvironmentSpec;

/// Tolerance on every probability normalisation.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pose: Pose2,
    pub weight: f64,
}

/// Pose region used by [`HierarchicalBelief::joint_belief_mass`].
#[derive(Debug, Clone, PartialEq)]
pub enum PoseRegion {
    /// The whole surface footprint.
    Footprint,
    /// Axis-aligned sub-rectangle of the surface footprint.
    Rect(Rect),
    /// Explicit subset of the surface's current particles.
    Particles(Vec<bool>),
}

/// Belief over one object's room, surface-given-room and pose-given-surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalBelief {
    object: ObjectId,
    room_belief: Vec<f64>,
    /// Indexed by room; entries follow `room_surfaces[room]`.
    surface_belief: Vec<Vec<f64>>,
    room_surfaces: Vec<Vec<SurfaceId>>,
    surface_room: Vec<RoomId>,
    /// Indexed by surface.
    particles: Vec<Vec<Particle>>,
    initial_particle_counts: Vec<usize>,
    surface_footprints: Vec<Rect>,
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub(crate) fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(BeliefError::Contract(format!("{what}: empty distribution")));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(BeliefError::Contract(format!("{what}: invalid entry in {p:?}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(BeliefError::Contract(format!("{what}: sums to {total}")));
    }
    Ok(())
}

impl HierarchicalBelief {
    /// Uniform rooms, uniform surfaces within each room, and
    /// `particles_per_surface` equally weighted particles drawn uniformly over
    /// each surface's free area.
    pub fn init_uniform<R: Rng + ?Sized>(
        env: &EnvironmentSpec,
        object: ObjectId,
        particles_per_surface: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if particles_per_surface == 0 {
            return Err(BeliefError::Config("particles_per_surface must be >= 1".into()));
        }
        if env.rooms.is_empty() || env.surfaces.is_empty() {
            return Err(BeliefError::Config("environment has no rooms or no surfaces".into()));
        }
        let room_surfaces = env.room_surfaces();
        if let Some(r) = room_surfaces.iter().position(Vec::is_empty) {
            return Err(BeliefError::Config(format!("room r{r} has no surfaces")));
        }
        let surface_room: Vec<RoomId> = env.surfaces.iter().map(|s| s.room).collect();
        let mut particles = Vec::with_capacity(env.surfaces.len());
        for s in &env.surfaces {
            let w = 1.0 / particles_per_surface as f64;
            let set = (0..particles_per_surface)
                .map(|_| Particle {
                    pose: env.sample_free_surface_pose(s.id, rng),
                    weight: w,
                })
                .collect();
            particles.push(set);
        }
        Ok(Self {
            object,
            room_belief: uniform(room_surfaces.len()),
            surface_belief: room_surfaces.iter().map(|s| uniform(s.len())).collect(),
            room_surfaces,
            surface_room,
            particles,
            initial_particle_counts: vec![particles_per_surface; env.surfaces.len()],
            surface_footprints: env.surfaces.iter().map(|s| s.footprint).collect(),
        })
    }

    pub fn object(&self) -> ObjectId {
        self.object
    }

    pub fn room_belief(&self) -> &[f64] {
        &self.room_belief
    }

    /// Conditional surface belief for `room`, ordered like [`Self::room_surfaces`].
    pub fn surface_belief(&self, room: RoomId) -> &[f64] {
        &self.surface_belief[room.index()]
    }

    pub fn surface_beliefs(&self) -> &[Vec<f64>] {
        &self.surface_belief
    }

    pub fn room_surfaces(&self) -> &[Vec<SurfaceId>] {
        &self.room_surfaces
    }

    pub fn num_rooms(&self) -> usize {
        self.room_belief.len()
    }

    pub fn num_surfaces(&self) -> usize {
        self.particles.len()
    }

    pub fn room_of(&self, surface: SurfaceId) -> RoomId {
        self.surface_room[surface.index()]
    }

    /// Position of `surface` within its room's surface list.
    pub fn local_index(&self, surface: SurfaceId) -> usize {
        let room = self.room_of(surface);
        self.room_surfaces[room.index()]
            .iter()
            .position(|&s| s == surface)
            .expect("surface table is consistent")
    }

    pub fn particles(&self, surface: SurfaceId) -> &[Particle] {
        &self.particles[surface.index()]
    }

    pub fn all_particles(&self) -> &[Vec<Particle>] {
        &self.particles
    }

    pub fn initial_particle_counts(&self) -> &[usize] {
        &self.initial_particle_counts
    }

    pub fn surface_footprint(&self, surface: SurfaceId) -> Rect {
        self.surface_footprints[surface.index()]
    }

    /// Marginal probability of the object being on `surface`.
    pub fn surface_marginal(&self, surface: SurfaceId) -> f64 {
        let room = self.room_of(surface);
        self.room_belief[room.index()] * self.surface_belief[room.index()][self.local_index(surface)]
    }

    pub fn set_room_belief(&mut self, p: Vec<f64>) -> Result<()> {
        if p.len() != self.room_belief.len() {
            return Err(BeliefError::Contract(format!(
                "room belief of length {} for {} rooms",
                p.len(),
                self.room_belief.len()
            )));
        }
        check_distribution(&p, "room belief")?;
        self.room_belief = p;
        Ok(())
    }

    pub fn set_surface_belief(&mut self, room: RoomId, p: Vec<f64>) -> Result<()> {
        let slot = self
            .surface_belief
            .get_mut(room.index())
            .ok_or_else(|| BeliefError::Contract(format!("unknown room {room}")))?;
        if p.len() != slot.len() {
            return Err(BeliefError::Contract(format!(
                "surface belief of length {} for {} surfaces",
                p.len(),
                slot.len()
            )));
        }
        check_distribution(&p, "surface belief")?;
        *slot = p;
        Ok(())
    }

    pub(crate) fn room_belief_mut(&mut self) -> &mut Vec<f64> {
        &mut self.room_belief
    }

    pub(crate) fn surface_belief_mut(&mut self) -> &mut Vec<Vec<f64>> {
        &mut self.surface_belief
    }

    pub(crate) fn particles_mut(&mut self) -> &mut Vec<Vec<Particle>> {
        &mut self.particles
    }

    /// Replaces a surface's particle set. Poses must lie on the surface; the
    /// weights are renormalised.
    pub fn set_particles(&mut self, surface: SurfaceId, mut set: Vec<Particle>) -> Result<()> {
        let fp = self.surface_footprint(surface);
        if let Some(p) = set.iter().find(|p| !fp.contains(p.pose.position())) {
            return Err(BeliefError::Contract(format!("particle {:?} outside {surface}", p.pose)));
        }
        if set.len() > self.initial_particle_counts[surface.index()] {
            return Err(BeliefError::Contract(format!(
                "{} particles exceed the initial count on {surface}",
                set.len()
            )));
        }
        let total: f64 = set.iter().map(|p| p.weight).sum();
        if !set.is_empty() {
            if !(total > 0.0) {
                return Err(BeliefError::Contract("particle weights sum to zero".into()));
            }
            set.iter_mut().for_each(|p| p.weight /= total);
        }
        self.particles[surface.index()] = set;
        Ok(())
    }

    /// Resets one categorical level (or every pose set) to uniform. Used to
    /// recover from a degenerate update.
    pub fn reset_level<R: Rng + ?Sized>(
        &mut self,
        level: BeliefLevel,
        env: &EnvironmentSpec,
        rng: &mut R,
    ) {
        match level {
            BeliefLevel::Room => self.room_belief = uniform(self.room_belief.len()),
            BeliefLevel::Surface => {
                for b in &mut self.surface_belief {
                    *b = uniform(b.len());
                }
            }
            BeliefLevel::Pose => {
                for s in 0..self.particles.len() {
                    self.reseed_surface(SurfaceId(s), env, rng);
                }
            }
        }
    }

    /// Refills every empty particle set uniformly over its surface. Returns
    /// the surfaces that were refilled.
    pub fn reseed_empty_surfaces<R: Rng + ?Sized>(
        &mut self,
        env: &EnvironmentSpec,
        rng: &mut R,
    ) -> Vec<SurfaceId> {
        let empty: Vec<SurfaceId> = (0..self.particles.len())
            .filter(|&s| self.particles[s].is_empty())
            .map(SurfaceId)
            .collect();
        for &s in &empty {
            self.reseed_surface(s, env, rng);
        }
        empty
    }

    fn reseed_surface<R: Rng + ?Sized>(&mut self, surface: SurfaceId, env: &EnvironmentSpec, rng: &mut R) {
        let n = self.initial_particle_counts[surface.index()];
        let w = 1.0 / n as f64;
        self.particles[surface.index()] = (0..n)
            .map(|_| Particle {
                pose: env.sample_free_surface_pose(surface, rng),
                weight: w,
            })
            .collect();
    }

    /// Fraction of `surface`'s particle weight inside `region`.
    pub fn region_fraction(&self, surface: SurfaceId, region: &PoseRegion) -> Result<f64> {
        let set = &self.particles[surface.index()];
        let fp = self.surface_footprint(surface);
        let total: f64 = set.iter().map(|p| p.weight).sum();
        if total <= 0.0 {
            return Ok(0.0);
        }
        let inside: f64 = match region {
            PoseRegion::Footprint => total,
            PoseRegion::Rect(r) => {
                if !fp.inflate(1e-9).contains_rect(r) {
                    return Err(BeliefError::Contract(format!(
                        "pose region {r:?} not inside the footprint of {surface}"
                    )));
                }
                set.iter()
                    .filter(|p| r.contains(p.pose.position()))
                    .map(|p| p.weight)
                    .sum()
            }
            PoseRegion::Particles(mask) => {
                if mask.len() != set.len() {
                    return Err(BeliefError::Contract(format!(
                        "particle mask of length {} for {} particles",
                        mask.len(),
                        set.len()
                    )));
                }
                set.iter().zip(mask).filter(|(_, &m)| m).map(|(p, _)| p.weight).sum()
            }
        };
        Ok((inside / total).clamp(0.0, 1.0))
    }

    /// `bel(room) * bel(surface | room) * P(pose in region | surface)`.
    pub fn joint_belief_mass(&self, room: RoomId, surface: SurfaceId, region: &PoseRegion) -> Result<f64> {
        if self.room_of(surface) != room {
            return Err(BeliefError::Contract(format!("{surface} is not in {room}")));
        }
        let frac = self.region_fraction(surface, region)?;
        Ok(self.room_belief[room.index()] * self.surface_belief[room.index()][self.local_index(surface)] * frac)
    }

    /// Checks every structural invariant.
    pub fn check_invariants(&self) -> Result<()> {
        check_distribution(&self.room_belief, "room belief")?;
        for (r, b) in self.surface_belief.iter().enumerate() {
            check_distribution(b, &format!("surface belief of r{r}"))?;
        }
        for (s, set) in self.particles.iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            let total: f64 = set.iter().map(|p| p.weight).sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL || set.iter().any(|p| p.weight < 0.0) {
                return Err(BeliefError::Contract(format!("particle weights on s{s} sum to {total}")));
            }
            let fp = self.surface_footprints[s];
            if let Some(p) = set.iter().find(|p| !fp.contains(p.pose.position())) {
                return Err(BeliefError::Contract(format!("particle {:?} left surface s{s}", p.pose)));
            }
            if set.len() > self.initial_particle_counts[s] {
                return Err(BeliefError::Contract(format!("s{s} holds more particles than initially")));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self, seed: u64) -> BeliefSnapshot {
        BeliefSnapshot {
            object: self.object,
            seed,
            room_belief: self.room_belief.clone(),
            surface_belief: self
                .surface_belief
                .iter()
                .enumerate()
                .map(|(r, b)| (r.to_string(), b.clone()))
                .collect(),
            particles: self
                .particles
                .iter()
                .enumerate()
                .map(|(s, set)| {
                    (
                        s.to_string(),
                        set.iter()
                            .map(|p| [p.pose.x, p.pose.y, p.pose.yaw, p.weight])
                            .collect(),
                    )
                })
                .collect(),
        }
    }
}

/// Serialised form of a belief. Map keys are room / surface indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub object: ObjectId,
    pub seed: u64,
    pub room_belief: Vec<f64>,
    pub surface_belief: BTreeMap<String, Vec<f64>>,
    pub particles: BTreeMap<String, Vec<[f64; 4]>>,
}
