use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::belief::{HierarchicalBelief, NoiseParams, SimilarityMatrix};
use crate::geometry::Pose2;
use crate::ids::ObjectId;
use crate::planner::{
    execute_and_replan, EpisodeSettings, Goal, LgbuUpdater, PlanTimeMode, PlanTrace, Planner, PlannerConfig,
    UpdateMode,
};
use crate::priors::{display_name, generate_prior, similarity_matrix, McqaLevel, McqaQuery, Provider};
use crate::sim::{EnvironmentSpec, ExecTiming, NoiseSource, SensorConfig, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorSource {
    Uniform,
    Mcqa,
}

/// One of the six compared methods: where the initial belief comes from and
/// how detects update it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub prior: PriorSource,
    pub update: UpdateMode,
}

impl VariantConfig {
    pub const BASELINE: Self = Self::new(PriorSource::Uniform, UpdateMode::Bayes);
    pub const CO_MODEL: Self = Self::new(PriorSource::Uniform, UpdateMode::BayesCoModel);
    pub const LGBU: Self = Self::new(PriorSource::Uniform, UpdateMode::Lgbu);
    pub const MCQA: Self = Self::new(PriorSource::Mcqa, UpdateMode::Bayes);
    pub const MCQA_CO_MODEL: Self = Self::new(PriorSource::Mcqa, UpdateMode::BayesCoModel);
    pub const MCQA_LGBU: Self = Self::new(PriorSource::Mcqa, UpdateMode::Lgbu);

    const fn new(prior: PriorSource, update: UpdateMode) -> Self {
        Self { prior, update }
    }

    pub fn all() -> [Self; 6] {
        [
            Self::BASELINE,
            Self::CO_MODEL,
            Self::LGBU,
            Self::MCQA,
            Self::MCQA_CO_MODEL,
            Self::MCQA_LGBU,
        ]
    }

    pub fn name(&self) -> &'static str {
        match (self.prior, self.update) {
            (PriorSource::Uniform, UpdateMode::Bayes) => "baseline",
            (PriorSource::Uniform, UpdateMode::BayesCoModel) => "co-model",
            (PriorSource::Uniform, UpdateMode::Lgbu) => "lgbu",
            (PriorSource::Mcqa, UpdateMode::Bayes) => "mcqa",
            (PriorSource::Mcqa, UpdateMode::BayesCoModel) => "mcqa+co-model",
            (PriorSource::Mcqa, UpdateMode::Lgbu) => "mcqa+lgbu",
        }
    }

    /// Parses a comma-separated list; `all` expands to the six variants.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        if s.trim() == "all" {
            return Ok(Self::all().to_vec());
        }
        s.split(',').map(|v| v.trim().parse()).collect()
    }
}

impl fmt::Display for VariantConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantConfig {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_lowercase().replace(['_', ' '], "-");
        Self::all()
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| HarnessError::Config(format!("unknown variant {s:?}")))
    }
}

/// Object to find and, optionally, where to put it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub target: String,
    /// (room label, surface label) the object must end up on.
    pub goal: Option<(String, String)>,
}

impl Default for TaskSpec {
    /// Bring the apple to the kitchen table.
    fn default() -> Self {
        Self {
            target: "apple".into(),
            goal: Some(("kitchen".into(), "table".into())),
        }
    }
}

impl TaskSpec {
    pub fn resolve(&self, env: &EnvironmentSpec) -> Result<Goal> {
        let object = env
            .object_by_label(&self.target)
            .ok_or_else(|| HarnessError::Config(format!("no object {:?} in the environment", self.target)))?;
        let Some((room, surface)) = &self.goal else {
            return Ok(Goal::Located(object));
        };
        let s = env
            .surfaces
            .iter()
            .find(|s| &s.label == surface && &env.room(s.room).label == room)
            .ok_or_else(|| HarnessError::Config(format!("no surface {surface:?} in room {room:?}")))?;
        Ok(Goal::At(object, s.id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub particles_per_surface: usize,
    pub replan_cap: usize,
    pub noise: NoiseParams,
    pub plan_time: PlanTimeMode,
    pub planner: PlannerConfig,
    pub sensor: SensorConfig,
    pub timing: ExecTiming,
    pub record_snapshots: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            particles_per_surface: 50,
            replan_cap: 100,
            noise: NoiseParams::default(),
            plan_time: PlanTimeMode::Modeled { seconds_per_node: 1e-3 },
            planner: PlannerConfig::default(),
            sensor: SensorConfig::default(),
            timing: ExecTiming::default(),
            record_snapshots: false,
        }
    }
}

/// The first navigation node (the first reachable room's center).
pub fn default_start(env: &EnvironmentSpec) -> Result<Pose2> {
    let node = env
        .nav_graph
        .nodes
        .first()
        .ok_or_else(|| HarnessError::Config("environment has no navigation nodes".into()))?;
    Ok(Pose2::new(node.position.x, node.position.y, 0.0))
}

/// Uniform belief, or MCQA priors over rooms and over each room's surfaces.
pub fn initial_belief<R: Rng + ?Sized>(
    prior: PriorSource,
    env: &EnvironmentSpec,
    target: ObjectId,
    provider: Option<&Provider>,
    particles_per_surface: usize,
    rng: &mut R,
) -> Result<HierarchicalBelief> {
    let mut belief = HierarchicalBelief::init_uniform(env, target, particles_per_surface, rng)?;
    if prior == PriorSource::Uniform {
        return Ok(belief);
    }
    let provider = provider.ok_or_else(|| HarnessError::Config("MCQA priors need a provider".into()))?;
    let object = display_name(&env.object(target).label);
    if env.rooms.len() >= 2 {
        let labels = env.rooms.iter().map(|r| display_name(&r.label)).collect();
        let q = McqaQuery::new(object.clone(), labels, McqaLevel::Room)?;
        belief.set_room_belief(generate_prior(provider, &q, None)?.prior)?;
    }
    for (r, members) in env.room_surfaces().iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        let room = display_name(&env.rooms[r].label);
        let labels = members.iter().map(|&s| display_name(&env.surface(s).label)).collect();
        let q = McqaQuery::new(object.clone(), labels, McqaLevel::Surface)?;
        let prior = generate_prior(provider, &q, Some(&room))?.prior;
        belief.set_surface_belief(crate::ids::RoomId(r), prior)?;
    }
    Ok(belief)
}

/// Similarities and toggles over the environment's objects, in id order.
pub fn colocation_matrix(env: &EnvironmentSpec, provider: &Provider) -> Result<SimilarityMatrix> {
    let labels: Vec<String> = env.objects.iter().map(|o| display_name(&o.label)).collect();
    Ok(similarity_matrix(provider, &labels)?)
}

/// Builds the variant's initial belief and co-location model, then runs the
/// plan-execute-replan loop in a fresh world. All randomness is derived
/// from `seed`; `noise` supplies the detector coins.
#[allow(clippy::too_many_arguments)]
pub fn run_episode(
    variant: VariantConfig,
    env: Arc<EnvironmentSpec>,
    task: &TaskSpec,
    provider: Option<&Provider>,
    start: Pose2,
    noise: Box<dyn NoiseSource>,
    cfg: &EpisodeConfig,
    seed: u64,
) -> Result<PlanTrace> {
    let goal = task.resolve(&env)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut belief = initial_belief(
        variant.prior,
        &env,
        goal.object(),
        provider,
        cfg.particles_per_surface,
        &mut rng,
    )?;
    let sims = match variant.update {
        UpdateMode::BayesCoModel => {
            let p = provider.ok_or_else(|| HarnessError::Config("the co-location model needs a provider".into()))?;
            Some(colocation_matrix(&env, p)?)
        }
        _ => None,
    };
    let lgbu: Option<&dyn LgbuUpdater> = match variant.update {
        UpdateMode::Lgbu => Some(
            provider
                .ok_or_else(|| HarnessError::Config("LGBU needs a provider".into()))? as &dyn LgbuUpdater,
        ),
        _ => None,
    };
    let planner = Planner::new(cfg.planner.clone(), cfg.sensor.clone());
    let mut world = World::new(env, start, cfg.sensor.clone(), cfg.noise, cfg.timing.clone(), noise);
    let settings = EpisodeSettings {
        update: variant.update,
        replan_cap: cfg.replan_cap,
        noise: cfg.noise,
        plan_time: cfg.plan_time,
        record_snapshots: cfg.record_snapshots,
        seed,
    };
    Ok(execute_and_replan(
        goal,
        &planner,
        &mut world,
        &mut belief,
        sims.as_ref(),
        &settings,
        lgbu,
        &mut rng,
    )?)
}
