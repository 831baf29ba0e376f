use serde::{Deserialize, Serialize};

use super::{BeliefError, Result};
use crate::ids::SurfaceId;

/// Fraction of each surface and room covered by one detect, measured by the
/// belief particles that fell inside the unoccluded field of view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityReport {
    /// Particles seen per surface. Empty when built from raw fractions.
    seen_counts: Vec<usize>,
    /// Particles per surface at initialisation.
    initial_counts: Vec<usize>,
    v_surface: Vec<f64>,
    v_room: Vec<f64>,
}

impl VisibilityReport {
    /// `v_s = seen / initial` per surface and `v_r = sum(seen) / sum(initial)`
    /// over the surfaces of each room.
    pub fn from_counts(
        room_surfaces: &[Vec<SurfaceId>],
        seen_counts: Vec<usize>,
        initial_counts: Vec<usize>,
    ) -> Result<Self> {
        if seen_counts.len() != initial_counts.len() {
            return Err(BeliefError::Contract(format!(
                "{} seen counts for {} surfaces",
                seen_counts.len(),
                initial_counts.len()
            )));
        }
        if let Some((s, (seen, init))) = seen_counts
            .iter()
            .zip(&initial_counts)
            .enumerate()
            .find(|(_, (seen, init))| seen > init)
        {
            return Err(BeliefError::Contract(format!(
                "surface s{s}: seen {seen} exceeds initial particle count {init}"
            )));
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let v_surface = seen_counts
            .iter()
            .zip(&initial_counts)
            .map(|(&s, &n)| ratio(s, n))
            .collect();
        let mut v_room = Vec::with_capacity(room_surfaces.len());
        for surfaces in room_surfaces {
            let mut seen = 0;
            let mut init = 0;
            for s in surfaces {
                let i = s.index();
                if i >= seen_counts.len() {
                    return Err(BeliefError::Contract(format!("unknown surface {s}")));
                }
                seen += seen_counts[i];
                init += initial_counts[i];
            }
            v_room.push(ratio(seen, init));
        }
        Ok(Self {
            seen_counts,
            initial_counts,
            v_surface,
            v_room,
        })
    }

    /// Report from precomputed fractions; used where no particle set exists.
    pub fn from_fractions(v_surface: Vec<f64>, v_room: Vec<f64>) -> Self {
        Self {
            seen_counts: Vec::new(),
            initial_counts: Vec::new(),
            v_surface,
            v_room,
        }
    }

    /// Report for a look that saw nothing.
    pub fn empty(num_surfaces: usize, num_rooms: usize) -> Self {
        Self {
            seen_counts: vec![0; num_surfaces],
            initial_counts: Vec::new(),
            v_surface: vec![0.0; num_surfaces],
            v_room: vec![0.0; num_rooms],
        }
    }

    pub fn v_surface(&self) -> &[f64] {
        &self.v_surface
    }

    pub fn v_room(&self) -> &[f64] {
        &self.v_room
    }

    pub fn seen_counts(&self) -> &[usize] {
        &self.seen_counts
    }

    pub fn initial_counts(&self) -> &[usize] {
        &self.initial_counts
    }

    /// True when nothing at all was in view.
    pub fn is_blind(&self) -> bool {
        self.v_surface.iter().all(|&v| v == 0.0) && self.v_room.iter().all(|&v| v == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> Vec<Vec<SurfaceId>> {
        vec![vec![SurfaceId(0), SurfaceId(1)], vec![SurfaceId(2)]]
    }

    #[test]
    fn half_seen_surface() {
        let r = VisibilityReport::from_counts(&layout(), vec![50, 0, 0], vec![100, 100, 100]).unwrap();
        assert_eq!(r.v_surface()[0], 0.5);
    }

    #[test]
    fn room_pools_its_surfaces() {
        let r = VisibilityReport::from_counts(&layout(), vec![100, 0, 0], vec![100, 100, 100]).unwrap();
        assert_eq!(r.v_room(), &[0.5, 0.0]);
    }

    #[test]
    fn nothing_seen() {
        let r = VisibilityReport::from_counts(&layout(), vec![0, 0, 0], vec![100, 100, 100]).unwrap();
        assert!(r.is_blind());
    }

    #[test]
    fn seen_beyond_initial_rejected() {
        assert!(VisibilityReport::from_counts(&layout(), vec![101, 0, 0], vec![100, 100, 100]).is_err());
    }
}
