use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{BeliefError, Result, VisibilityReport};
use crate::geometry::Pose2;
use crate::ids::{ObjectId, SurfaceId};

/// Per-surface, per-particle flag: was the particle inside the unoccluded
/// field of view during the look.
pub type SeenMask = Vec<Vec<bool>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub object: ObjectId,
    pub pose: Pose2,
    /// Surface the detected pose lies on.
    pub surface: SurfaceId,
}

/// One `detect` outcome as seen by the estimator of `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationEvent {
    pub target: ObjectId,
    pub visibility: VisibilityReport,
    pub detections: Vec<Detection>,
    /// Mask over the target belief's particles, aligned with its particle sets.
    pub seen_mask: SeenMask,
}

impl ObservationEvent {
    pub fn new(
        target: ObjectId,
        visibility: VisibilityReport,
        detections: Vec<Detection>,
        seen_mask: SeenMask,
    ) -> Result<Self> {
        let mut objects = BTreeSet::new();
        for d in &detections {
            if !objects.insert(d.object) {
                return Err(BeliefError::Contract(format!("object {} detected twice", d.object)));
            }
            let v = visibility.v_surface().get(d.surface.index()).copied().unwrap_or(0.0);
            if v <= 0.0 {
                return Err(BeliefError::Contract(format!(
                    "detection of {} on unobserved surface {}",
                    d.object, d.surface
                )));
            }
        }
        Ok(Self {
            target,
            visibility,
            detections,
            seen_mask,
        })
    }

    pub fn detection_of(&self, object: ObjectId) -> Option<&Detection> {
        self.detections.iter().find(|d| d.object == object)
    }

    pub fn target_detected(&self) -> bool {
        self.detection_of(self.target).is_some()
    }

    /// Surfaces with nonzero visibility.
    pub fn observed_region(&self) -> Vec<SurfaceId> {
        self.visibility
            .v_surface()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| SurfaceId(i))
            .collect()
    }
}
