use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{default_start, run_episode, EpisodeConfig, TaskSpec, VariantConfig};
use super::metrics::MetricsTable;
use super::{HarnessError, Result};
use crate::priors::Provider;
use crate::sim::{sample_environment, EnvSampleConfig, EnvironmentSpec, PlacementDataset, RandomNoise};

/// (rooms, surfaces) layouts of the simulated benchmark.
pub const LAYOUTS: [(usize, usize); 6] = [(4, 8), (4, 16), (6, 12), (6, 24), (8, 16), (8, 32)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub rooms: usize,
    pub surfaces: usize,
}

impl Layout {
    pub fn new(rooms: usize, surfaces: usize) -> Result<Self> {
        if !LAYOUTS.contains(&(rooms, surfaces)) {
            return Err(HarnessError::Config(format!(
                "layout {rooms}x{surfaces} is not one of {LAYOUTS:?}"
            )));
        }
        Ok(Self { rooms, surfaces })
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.rooms, self.surfaces)
    }
}

impl FromStr for Layout {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || HarnessError::Config(format!("layout {s:?} should look like 6x12"));
        let (r, n) = s.split_once(['x', 'X', ',']).ok_or_else(bad)?;
        Self::new(r.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub layout: Layout,
    pub num_envs: usize,
    pub seed: u64,
    pub adversarial: bool,
    pub replan_cap: usize,
    pub task: TaskSpec,
    pub episode: EpisodeConfig,
    /// Generator settings besides the layout and adversarial flag.
    pub sample: EnvSampleConfig,
    /// Worker threads; `None` uses rayon's default pool.
    pub workers: Option<usize>,
}

impl BenchmarkConfig {
    pub fn new(layout: Layout) -> Self {
        Self {
            layout,
            num_envs: 50,
            seed: 0,
            adversarial: false,
            replan_cap: 100,
            task: TaskSpec::default(),
            episode: EpisodeConfig::default(),
            sample: EnvSampleConfig::new(layout.rooms, layout.surfaces),
            workers: None,
        }
    }

    /// Seed of the i-th environment, shared by every variant.
    pub fn env_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }

    pub fn sample_config(&self) -> EnvSampleConfig {
        let mut s = self.sample.clone();
        s.num_rooms = self.layout.rooms;
        s.num_surfaces = self.layout.surfaces;
        s.adversarial = self.adversarial;
        s.target = self.task.target.clone();
        s
    }
}

/// One line of the per-episode CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub variant: String,
    pub env_seed: u64,
    pub replans: usize,
    pub plan_time_s: f64,
    pub exec_time_s: f64,
    pub solved: bool,
    /// Error or panic message when the episode did not run to completion.
    pub error: Option<String>,
}

impl EpisodeRow {
    pub const CSV_HEADER: &'static str = "variant,env_seed,replans,plan_time_s,exec_time_s,solved";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.variant, self.env_seed, self.replans, self.plan_time_s, self.exec_time_s, self.solved
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub rows: Vec<EpisodeRow>,
    pub table: MetricsTable,
}

impl BenchmarkResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(EpisodeRow::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.csv_line());
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.table)?)
    }

    /// Writes `episodes.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("episodes.csv"), self.to_csv())?;
        std::fs::write(dir.join("summary.json"), self.summary_json()? + "\n")?;
        Ok(())
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".into()
    }
}

fn failed_row(variant: VariantConfig, env_seed: u64, msg: String) -> EpisodeRow {
    EpisodeRow {
        variant: variant.name().into(),
        env_seed,
        replans: 0,
        plan_time_s: 0.0,
        exec_time_s: 0.0,
        solved: false,
        error: Some(msg),
    }
}

fn episode_row(
    cfg: &BenchmarkConfig,
    variant: VariantConfig,
    env: &Result<Arc<EnvironmentSpec>>,
    env_seed: u64,
    provider: &Provider,
) -> EpisodeRow {
    let env = match env {
        Ok(e) => e.clone(),
        Err(e) => return failed_row(variant, env_seed, format!("environment: {e}")),
    };
    let mut ep = cfg.episode.clone();
    ep.replan_cap = cfg.replan_cap;
    let run = catch_unwind(AssertUnwindSafe(|| -> Result<_> {
        let start = default_start(&env)?;
        let noise = Box::new(RandomNoise::new(ChaCha8Rng::seed_from_u64(env_seed ^ 0x5EED_C0FF_EE00)));
        run_episode(variant, env.clone(), &cfg.task, Some(provider), start, noise, &ep, env_seed)
    }));
    match run {
        Ok(Ok(trace)) => EpisodeRow {
            variant: variant.name().into(),
            env_seed,
            replans: trace.replans,
            plan_time_s: trace.plan_time,
            exec_time_s: trace.exec_time,
            solved: trace.solved,
            error: None,
        },
        Ok(Err(e)) => {
            log::warn!("{variant} on env {env_seed} failed: {e}");
            failed_row(variant, env_seed, e.to_string())
        }
        Err(p) => {
            let msg = panic_message(p);
            log::error!("{variant} on env {env_seed} panicked: {msg}");
            failed_row(variant, env_seed, format!("panic: {msg}"))
        }
    }
}

/// Runs every variant on `num_envs` sampled households. Environments are
/// sampled once per seed and shared by all variants; episodes run in
/// parallel and rows come back in (variant, environment) order. Failed or
/// panicking episodes are recorded as unsolved.
pub fn run_benchmark(
    cfg: &BenchmarkConfig,
    variants: &[VariantConfig],
    dataset: &PlacementDataset,
    provider: &Provider,
) -> Result<BenchmarkResult> {
    if cfg.replan_cap == 0 {
        return Err(HarnessError::Config("replan cap must be at least 1".into()));
    }
    let sample_cfg = cfg.sample_config();
    let work = || {
        let envs: Vec<(u64, Result<Arc<EnvironmentSpec>>)> = (0..cfg.num_envs)
            .into_par_iter()
            .map(|i| {
                let seed = cfg.env_seed(i);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let env = sample_environment(dataset, &sample_cfg, &mut rng)
                    .map(Arc::new)
                    .map_err(HarnessError::from);
                (seed, env)
            })
            .collect();
        let jobs: Vec<(VariantConfig, usize)> = variants
            .iter()
            .flat_map(|&v| (0..envs.len()).map(move |i| (v, i)))
            .collect();
        jobs.into_par_iter()
            .map(|(v, i)| episode_row(cfg, v, &envs[i].1, envs[i].0, provider))
            .collect::<Vec<EpisodeRow>>()
    };
    let rows = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let table = MetricsTable::from_rows(&cfg.layout.to_string(), &rows);
    Ok(BenchmarkResult { rows, table })
}
