use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeConfig, TaskSpec, VariantConfig};
use super::{HarnessError, Result};
use crate::geometry::Pose2;
use crate::planner::PlanTrace;
use crate::priors::{MockModel, Provider};
use crate::sim::{EnvironmentSpec, ScriptedNoise};

/// Expected outcome of one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    /// Surface label of each detect, in order.
    pub detects: Vec<String>,
    pub replans: usize,
}

/// A fixed household, task, detector coins, mock priors and the expected
/// detect sequence per variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub env: EnvironmentSpec,
    pub start: Pose2,
    pub task: TaskSpec,
    pub seed: u64,
    #[serde(default)]
    pub episode: EpisodeConfig,
    /// False-negative coins consumed one per visible object per detect;
    /// once exhausted nothing is missed.
    #[serde(default)]
    pub false_negatives: Vec<bool>,
    /// MCQA logprobs per object and location label for the mock provider.
    #[serde(default)]
    pub mcqa_logprobs: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub expected: BTreeMap<String, Expectation>,
}

impl ScenarioFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        file.env.validate()?;
        Ok(file)
    }

    /// `base` with this scenario's MCQA logprobs layered on top.
    pub fn mock_model(&self, base: MockModel) -> MockModel {
        let mut m = base;
        for (object, table) in &self.mcqa_logprobs {
            for (location, lp) in table {
                m = m.with_logprob(object, location, *lp);
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub variant: String,
    pub detects: Vec<String>,
    pub replans: usize,
    pub solved: bool,
    pub expected: Option<Expectation>,
    /// First difference from the expectation, if any.
    pub divergence: Option<String>,
    pub trace: PlanTrace,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.solved && self.divergence.is_none()
    }
}

fn divergence(detects: &[String], replans: usize, exp: &Expectation) -> Option<String> {
    for (i, (got, want)) in detects.iter().zip(&exp.detects).enumerate() {
        if got != want {
            return Some(format!("detect {} targeted {got}, expected {want}", i + 1));
        }
    }
    if detects.len() != exp.detects.len() {
        return Some(format!("{} detects, expected {}", detects.len(), exp.detects.len()));
    }
    if replans != exp.replans {
        return Some(format!("{replans} replans, expected {}", exp.replans));
    }
    None
}

/// Runs `variant` on the scenario with its scripted coins and compares the
/// detect sequence and replan count with the scenario's expectation.
pub fn run_scenario(file: &ScenarioFile, variant: VariantConfig, provider: &Provider) -> Result<ScenarioReport> {
    let env = Arc::new(file.env.clone());
    let noise = Box::new(ScriptedNoise::new(file.false_negatives.iter().copied()));
    let trace = run_episode(
        variant,
        env.clone(),
        &file.task,
        Some(provider),
        file.start,
        noise,
        &file.episode,
        file.seed,
    )?;
    let detects: Vec<String> = trace
        .detect_surfaces()
        .into_iter()
        .map(|s| env.surface(s).label.clone())
        .collect();
    let expected = file.expected.get(variant.name()).cloned();
    let mut div = expected.as_ref().and_then(|e| divergence(&detects, trace.replans, e));
    if div.is_none() && !trace.solved {
        div = Some("episode did not reach the goal".into());
    }
    Ok(ScenarioReport {
        scenario: file.name.clone(),
        variant: variant.name().into(),
        detects,
        replans: trace.replans,
        solved: trace.solved,
        expected,
        divergence: div,
        trace,
    })
}

impl ScenarioReport {
    /// Error naming the divergence point when the expectation was not met.
    pub fn into_result(self) -> Result<Self> {
        match &self.divergence {
            Some(d) => Err(HarnessError::Scenario(format!("{} / {}: {d}", self.scenario, self.variant))),
            None => Ok(self),
        }
    }
}
