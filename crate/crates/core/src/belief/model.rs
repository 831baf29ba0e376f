//! Observation and co-location models shared by the room and surface filters.

use serde::{Deserialize, Serialize};

use super::{BeliefError, Result, VisibilityReport};
use crate::ids::{RoomId, SurfaceId};

/// Detector and update noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// False-negative probability.
    pub p_fn: f64,
    /// False-positive probability.
    pub p_fp: f64,
    /// Standard deviation of pose measurements, meters.
    pub sigma: f64,
    /// Decay length of the distance-based co-location particle weight, meters.
    pub lambda: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            p_fn: 0.01,
            p_fp: 0.01,
            sigma: 0.05,
            lambda: 1.0,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_fn) || !prob(self.p_fp) {
            return Err(BeliefError::Config(format!(
                "p_fn={} p_fp={} must lie in [0,1]",
                self.p_fn, self.p_fp
            )));
        }
        if !(self.sigma > 0.0) || !(self.lambda > 0.0) {
            return Err(BeliefError::Config(format!(
                "sigma={} lambda={} must be positive",
                self.sigma, self.lambda
            )));
        }
        Ok(())
    }
}

/// Visibility-aware likelihood of one categorical observation of a location.
///
/// `matches` is true when the observed location is the hypothesised one.
pub fn location_obs_likelihood(detected: bool, matches: bool, v: f64, noise: &NoiseParams) -> f64 {
    match (matches, detected) {
        (true, true) => (1.0 - noise.p_fn) * v,
        (true, false) => (1.0 - v) + v * noise.p_fn,
        (false, true) => noise.p_fp * v,
        (false, false) => 1.0 - v * noise.p_fp,
    }
}

pub fn room_obs_likelihood(
    detected: bool,
    obs_room_matches_state: bool,
    v_r: f64,
    noise: &NoiseParams,
) -> f64 {
    location_obs_likelihood(detected, obs_room_matches_state, v_r, noise)
}

pub fn surface_obs_likelihood(
    detected: bool,
    obs_surface_matches_state: bool,
    v_s: f64,
    noise: &NoiseParams,
) -> f64 {
    location_obs_likelihood(detected, obs_surface_matches_state, v_s, noise)
}

/// Likelihood of one look over every location, for an object at `state`.
///
/// Each location contributes its detected / not-detected factor; locations
/// with zero visibility contribute exactly 1 when nothing was detected there.
pub fn own_location_likelihood(
    state: usize,
    detected_at: Option<usize>,
    visibility: &[f64],
    noise: &NoiseParams,
) -> f64 {
    visibility
        .iter()
        .enumerate()
        .map(|(loc, &v)| location_obs_likelihood(detected_at == Some(loc), loc == state, v, noise))
        .product()
}

/// Conditional probability that object `j` sits at a location given object
/// `k`'s location, interpolated by their similarity.
pub fn colocation_prob(sim: f64, same_location: bool, num_locations: usize) -> Result<f64> {
    if num_locations < 2 {
        return Err(BeliefError::Config(format!(
            "co-location needs at least 2 locations, got {num_locations}"
        )));
    }
    if !(-1.0..=1.0).contains(&sim) {
        return Err(BeliefError::InvalidSimilarity(format!("sim={sim} outside [-1,1]")));
    }
    let r = num_locations as f64;
    let u = 1.0 / r;
    let delta = if same_location { 1.0 } else { 0.0 };
    Ok(if sim >= 0.0 {
        sim * delta + (1.0 - sim) * u
    } else {
        let delta_bar = (1.0 - delta) / (r - 1.0);
        sim.abs() * delta_bar + (1.0 + sim) * u
    })
}

/// Surface-within-room co-location factor. Rooms that differ carry no
/// surface information (uniform over the room's surfaces); a single-surface
/// room is certain.
pub fn surface_colocation_prob(
    sim: f64,
    same_room: bool,
    same_surface: bool,
    surfaces_in_room: usize,
) -> Result<f64> {
    if surfaces_in_room == 0 {
        return Err(BeliefError::Config("room without surfaces".into()));
    }
    if !same_room {
        return Ok(1.0 / surfaces_in_room as f64);
    }
    if surfaces_in_room == 1 {
        return Ok(1.0);
    }
    colocation_prob(sim, same_surface, surfaces_in_room)
}

/// Room-level likelihood of object `j`'s observation given object `k` is in
/// `x_k_room`, marginalising over `j`'s room.
pub fn cross_object_room_likelihood(
    obs_j: Option<RoomId>,
    x_k_room: RoomId,
    sim_jk: f64,
    visibility: &VisibilityReport,
    noise: &NoiseParams,
) -> Result<f64> {
    let v = visibility.v_room();
    let num_rooms = v.len();
    let mut total = 0.0;
    for room_j in 0..num_rooms {
        let obs = own_location_likelihood(room_j, obs_j.map(RoomId::index), v, noise);
        total += obs * colocation_prob(sim_jk, room_j == x_k_room.index(), num_rooms)?;
    }
    Ok(total)
}

/// Surface-level likelihood of object `j`'s observation given object `k` is
/// on `x_k_surface` in `x_k_room`, marginalising over `j`'s room and surface.
pub fn cross_object_surface_likelihood(
    obs_j: Option<SurfaceId>,
    x_k_room: RoomId,
    x_k_surface: SurfaceId,
    sim_jk: f64,
    visibility: &VisibilityReport,
    room_surfaces: &[Vec<SurfaceId>],
    noise: &NoiseParams,
) -> Result<f64> {
    let v = visibility.v_surface();
    let num_rooms = room_surfaces.len();
    let mut total = 0.0;
    for (room_j, surfaces) in room_surfaces.iter().enumerate() {
        let same_room = room_j == x_k_room.index();
        let p_room = if num_rooms >= 2 {
            colocation_prob(sim_jk, same_room, num_rooms)?
        } else {
            1.0
        };
        if p_room == 0.0 {
            continue;
        }
        for &surface_j in surfaces {
            let obs = own_location_likelihood(surface_j.index(), obs_j.map(SurfaceId::index), v, noise);
            let p_surf =
                surface_colocation_prob(sim_jk, same_room, surface_j == x_k_surface, surfaces.len())?;
            total += obs * p_room * p_surf;
        }
    }
    Ok(total)
}
