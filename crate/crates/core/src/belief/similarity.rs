use serde::{Deserialize, Serialize};

use super::{BeliefError, Result};
use crate::ids::ObjectId;

/// Pairwise object similarity in `[-1, 1]` plus the per-object co-location
/// gate (`toggle[j] == false` means detections of `j` never shift other
/// objects' beliefs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    sim: Vec<Vec<f64>>,
    toggle: Vec<bool>,
}

impl SimilarityMatrix {
    pub fn new(sim: Vec<Vec<f64>>, toggle: Vec<bool>) -> Result<Self> {
        let n = sim.len();
        if toggle.len() != n {
            return Err(BeliefError::InvalidSimilarity(format!(
                "{} toggles for {n} objects",
                toggle.len()
            )));
        }
        for (i, row) in sim.iter().enumerate() {
            if row.len() != n {
                return Err(BeliefError::InvalidSimilarity(format!("row {i} has {} entries", row.len())));
            }
            if row[i] != 1.0 {
                return Err(BeliefError::InvalidSimilarity(format!("diagonal entry {i} is {}", row[i])));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(-1.0..=1.0).contains(&v) {
                    return Err(BeliefError::InvalidSimilarity(format!("sim({i},{j})={v}")));
                }
                if v != sim[j][i] {
                    return Err(BeliefError::InvalidSimilarity(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { sim, toggle })
    }

    /// No similarity between distinct objects, co-location enabled everywhere.
    pub fn identity(n: usize) -> Self {
        let sim = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            sim,
            toggle: vec![true; n],
        }
    }

    pub fn len(&self) -> usize {
        self.sim.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sim.is_empty()
    }

    pub fn sim(&self, a: ObjectId, b: ObjectId) -> f64 {
        self.sim[a.index()][b.index()]
    }

    /// Sets a symmetric pair.
    pub fn set(&mut self, a: ObjectId, b: ObjectId, value: f64) -> Result<()> {
        if a == b && value != 1.0 {
            return Err(BeliefError::InvalidSimilarity("diagonal must stay 1".into()));
        }
        if !(-1.0..=1.0).contains(&value) {
            return Err(BeliefError::InvalidSimilarity(format!("sim={value}")));
        }
        self.sim[a.index()][b.index()] = value;
        self.sim[b.index()][a.index()] = value;
        Ok(())
    }

    /// Whether detections of `object` feed the co-location model.
    pub fn colocation_enabled(&self, object: ObjectId) -> bool {
        self.toggle[object.index()]
    }

    pub fn set_toggle(&mut self, object: ObjectId, enabled: bool) {
        self.toggle[object.index()] = enabled;
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.sim
    }

    pub fn toggles(&self) -> &[bool] {
        &self.toggle
    }
}
