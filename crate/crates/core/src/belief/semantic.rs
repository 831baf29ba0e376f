//! Discrete Bayes filters over rooms and surfaces-within-rooms.

use super::model::{cross_object_room_likelihood, cross_object_surface_likelihood, own_location_likelihood};
use super::{
    BeliefError, BeliefLevel, HierarchicalBelief, NoiseParams, ObservationEvent, Result, SeenMask,
    SimilarityMatrix, VisibilityReport,
};
use crate::ids::RoomId;

/// What a semantic update changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SemanticUpdateSummary {
    pub room_changed: bool,
    /// Number of rooms whose conditional surface belief changed.
    pub rooms_with_surface_change: usize,
    /// Number of co-located detections that contributed.
    pub colocation_terms: usize,
}

/// Multiplies `prior` by `likelihood` and renormalises. `Ok(None)` when every
/// likelihood is identical, in which case the prior is left untouched.
fn bayes_step(prior: &[f64], likelihood: &[f64], level: BeliefLevel) -> Result<Option<Vec<f64>>> {
    if likelihood.windows(2).all(|w| w[0] == w[1]) {
        return Ok(None);
    }
    let unnorm: Vec<f64> = prior.iter().zip(likelihood).map(|(p, l)| p * l).collect();
    let total: f64 = unnorm.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(BeliefError::Degenerate { level });
    }
    Ok(Some(unnorm.into_iter().map(|x| x / total).collect()))
}

impl HierarchicalBelief {
    /// Visibility of one look, from a per-particle seen mask.
    pub fn compute_visibility(&self, seen_mask: &SeenMask) -> Result<VisibilityReport> {
        let particles = self.all_particles();
        if seen_mask.len() != particles.len() {
            return Err(BeliefError::Contract(format!(
                "seen mask covers {} surfaces, belief has {}",
                seen_mask.len(),
                particles.len()
            )));
        }
        let mut seen = Vec::with_capacity(particles.len());
        for (s, (mask, set)) in seen_mask.iter().zip(particles).enumerate() {
            if mask.len() != set.len() {
                return Err(BeliefError::Contract(format!(
                    "seen mask for s{s} has {} entries, surface holds {} particles",
                    mask.len(),
                    set.len()
                )));
            }
            seen.push(mask.iter().filter(|&&m| m).count());
        }
        VisibilityReport::from_counts(self.room_surfaces(), seen, self.initial_particle_counts().to_vec())
    }

    /// Bayes update of the room belief and of every room's conditional
    /// surface belief from one observation event.
    ///
    /// With `sims` present, each detected object other than the target whose
    /// co-location toggle is on contributes a cross-object likelihood. Levels
    /// whose likelihood is flat across hypotheses are left bit-for-bit
    /// unchanged. On error nothing is modified.
    pub fn update_semantic_belief(
        &mut self,
        event: &ObservationEvent,
        sims: Option<&SimilarityMatrix>,
        noise: &NoiseParams,
    ) -> Result<SemanticUpdateSummary> {
        if event.target != self.object() {
            return Err(BeliefError::Contract(format!(
                "event for {} applied to belief of {}",
                event.target,
                self.object()
            )));
        }
        let vis = &event.visibility;
        if vis.v_room().len() != self.num_rooms() || vis.v_surface().len() != self.num_surfaces() {
            return Err(BeliefError::Contract("visibility report does not match the layout".into()));
        }
        let own = event.detection_of(self.object()).map(|d| d.surface);
        let own_room = own.map(|s| self.room_of(s));

        let others: Vec<_> = match sims {
            Some(m) => event
                .detections
                .iter()
                .filter(|d| d.object != self.object() && m.colocation_enabled(d.object))
                .map(|d| (d.surface, m.sim(d.object, self.object())))
                .collect(),
            None => Vec::new(),
        };

        // room level
        let mut room_lik = Vec::with_capacity(self.num_rooms());
        for r in 0..self.num_rooms() {
            let mut l = own_location_likelihood(r, own_room.map(RoomId::index), vis.v_room(), noise);
            for &(surface_j, sim) in &others {
                let room_j = self.room_of(surface_j);
                l *= cross_object_room_likelihood(Some(room_j), RoomId(r), sim, vis, noise)?;
            }
            room_lik.push(l);
        }
        let new_room = bayes_step(self.room_belief(), &room_lik, BeliefLevel::Room)?;

        // surface level, one conditional filter per room
        let mut new_surfaces = Vec::with_capacity(self.num_rooms());
        for r in 0..self.num_rooms() {
            let room = RoomId(r);
            let surfaces = &self.room_surfaces()[r];
            let mut lik = Vec::with_capacity(surfaces.len());
            for &s in surfaces {
                let mut l = own_location_likelihood(s.index(), own.map(|x| x.index()), vis.v_surface(), noise);
                for &(surface_j, sim) in &others {
                    l *= cross_object_surface_likelihood(
                        Some(surface_j),
                        room,
                        s,
                        sim,
                        vis,
                        self.room_surfaces(),
                        noise,
                    )?;
                }
                lik.push(l);
            }
            new_surfaces.push(bayes_step(self.surface_belief(room), &lik, BeliefLevel::Surface)?);
        }

        let mut summary = SemanticUpdateSummary {
            colocation_terms: others.len(),
            ..Default::default()
        };
        if let Some(p) = new_room {
            *self.room_belief_mut() = p;
            summary.room_changed = true;
        }
        for (r, p) in new_surfaces.into_iter().enumerate() {
            if let Some(p) = p {
                self.surface_belief_mut()[r] = p;
                summary.rooms_with_surface_change += 1;
            }
        }
        Ok(summary)
    }
}
