use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use belief_tamp::harness::{
    colocation_matrix, default_dataset, run_benchmark, run_scenario, BenchmarkConfig, Layout, ScenarioFile,
    VariantConfig,
};
use belief_tamp::planner::PlanTimeMode;
use belief_tamp::priors::{
    describe_object_uses, display_name, generate_prior, LgbuMockMode, McqaLevel, McqaQuery, MockModel, Provider,
    ProviderConfig, ProviderMode,
};
use belief_tamp::sim::{render_svg, sample_environment, EnvSampleConfig, EnvironmentSpec, PlacementDataset};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "btamp", version, about = "Object search with belief-space planning and language-model priors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmarks over sampled households.
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
    /// Scripted regression scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Household generation.
    Env {
        #[command(subcommand)]
        action: EnvAction,
    },
    /// Language-model prior retrieval and caching.
    Priors {
        #[command(subcommand)]
        action: PriorsAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LgbuMock {
    Heuristic,
    Adversarial,
    Uniform,
}

#[derive(Args)]
struct ProviderArgs {
    /// live, replay or mock.
    #[arg(long, default_value = "mock")]
    mode: String,
    /// JSON-lines response cache.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// JSON provider config (endpoint, model, API key variable, ...).
    #[arg(long)]
    provider_config: Option<PathBuf>,
    /// Answers of the mock backend to LGBU queries.
    #[arg(long, value_enum, default_value = "heuristic")]
    lgbu_mock: LgbuMock,
}

#[derive(Args)]
struct DatasetArgs {
    /// Housekeep-style annotation JSON-lines; the bundled synthetic corpus by default.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchAction {
    Run {
        #[arg(long, default_value = "6x12")]
        layout: Layout,
        #[arg(long, default_value_t = 50)]
        envs: usize,
        /// Comma-separated variant names or "all".
        #[arg(long, default_value = "all")]
        variants: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        adversarial: bool,
        #[arg(long, default_value_t = 100)]
        replan_cap: usize,
        #[arg(long)]
        workers: Option<usize>,
        /// Measure planning time on the wall clock instead of per expanded node.
        #[arg(long)]
        wall_clock: bool,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[command(flatten)]
        provider: ProviderArgs,
        #[command(flatten)]
        dataset: DatasetArgs,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    Run {
        file: PathBuf,
        /// Variant name or "all" for every variant with an expectation.
        #[arg(long, default_value = "all")]
        variant: String,
        /// Write the traces as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        provider: ProviderArgs,
    },
}

#[derive(Subcommand)]
enum EnvAction {
    Sample {
        #[arg(long, default_value = "4x8")]
        layout: Layout,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        adversarial: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also render the household as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        dataset: DatasetArgs,
    },
}

#[derive(Subcommand)]
enum PriorsAction {
    /// Queries MCQA room and surface priors, descriptions, embeddings and
    /// toggles for the objects of an environment, filling the cache.
    Fetch {
        #[arg(long)]
        env: PathBuf,
        /// Comma-separated object labels; all objects of the environment by default.
        #[arg(long)]
        objects: Option<String>,
        #[command(flatten)]
        provider: ProviderArgs,
        #[command(flatten)]
        dataset: DatasetArgs,
    },
}

fn load_dataset(args: &DatasetArgs) -> Result<PlacementDataset> {
    match &args.dataset {
        Some(p) => PlacementDataset::from_jsonl(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(default_dataset()),
    }
}

fn build_provider(args: &ProviderArgs, dataset: &PlacementDataset) -> Result<Provider> {
    let mut cfg = match &args.provider_config {
        Some(p) => ProviderConfig::from_json_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => ProviderConfig::default(),
    };
    cfg.mode = args.mode.parse::<ProviderMode>()?;
    if args.cache.is_some() {
        cfg.cache_path = args.cache.clone();
    }
    let lgbu = match args.lgbu_mock {
        LgbuMock::Heuristic => LgbuMockMode::Heuristic,
        LgbuMock::Adversarial => LgbuMockMode::Adversarial,
        LgbuMock::Uniform => LgbuMockMode::Uniform,
    };
    let mock = MockModel::new().with_dataset(Arc::new(dataset.clone())).with_lgbu(lgbu);
    Ok(Provider::from_config(&cfg, Some(mock))?)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Bench {
            action:
                BenchAction::Run {
                    layout,
                    envs,
                    variants,
                    seed,
                    adversarial,
                    replan_cap,
                    workers,
                    wall_clock,
                    out,
                    provider,
                    dataset,
                },
        } => {
            let data = load_dataset(&dataset)?;
            let provider = build_provider(&provider, &data)?;
            let mut cfg = BenchmarkConfig::new(layout);
            cfg.num_envs = envs;
            cfg.seed = seed;
            cfg.adversarial = adversarial;
            cfg.replan_cap = replan_cap;
            cfg.workers = workers;
            if wall_clock {
                cfg.episode.plan_time = PlanTimeMode::WallClock;
            }
            let variants = VariantConfig::parse_list(&variants)?;
            let result = run_benchmark(&cfg, &variants, &data, &provider)?;
            result.write(&out)?;
            println!("layout {layout}, {envs} environments");
            println!("{:<15} {:>18} {:>22} {:>9}", "variant", "replans", "cumulative time (s)", "unsolved");
            for v in &result.table.variants {
                println!(
                    "{:<15} {:>8.2} ± {:<7.2} {:>10.1} ± {:<9.1} {:>9}",
                    v.variant, v.replans.mean, v.replans.ci, v.cumulative_time.mean, v.cumulative_time.ci, v.unsolved
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Scenario {
            action: ScenarioAction::Run {
                file,
                variant,
                out,
                provider,
            },
        } => {
            let scenario = ScenarioFile::load(&file).with_context(|| format!("reading {}", file.display()))?;
            let data = default_dataset();
            let mut provider_args = provider;
            let cfg_mode = provider_args.mode.parse::<ProviderMode>()?;
            let provider = if cfg_mode == ProviderMode::Mock {
                let mock = scenario.mock_model(MockModel::new().with_dataset(Arc::new(data)));
                let mut cfg = ProviderConfig {
                    mode: ProviderMode::Mock,
                    ..ProviderConfig::default()
                };
                cfg.cache_path = provider_args.cache.take();
                Provider::from_config(&cfg, Some(mock))?
            } else {
                build_provider(&provider_args, &data)?
            };
            let variants: Vec<VariantConfig> = if variant == "all" {
                VariantConfig::all()
                    .into_iter()
                    .filter(|v| scenario.expected.contains_key(v.name()))
                    .collect()
            } else {
                VariantConfig::parse_list(&variant)?
            };
            let mut reports = Vec::new();
            let mut failed = false;
            for v in variants {
                let r = run_scenario(&scenario, v, &provider)?;
                println!(
                    "{:<15} detects [{}] replans {} {}",
                    r.variant,
                    r.detects.join(", "),
                    r.replans,
                    match &r.divergence {
                        None => "PASS".to_string(),
                        Some(d) => format!("FAIL ({d})"),
                    }
                );
                failed |= !r.passed();
                reports.push(r);
            }
            if let Some(out) = out {
                std::fs::write(&out, serde_json::to_string_pretty(&reports)?)?;
            }
            if failed {
                bail!("scenario expectations not met");
            }
        }
        Command::Env {
            action:
                EnvAction::Sample {
                    layout,
                    seed,
                    adversarial,
                    out,
                    svg,
                    dataset,
                },
        } => {
            let data = load_dataset(&dataset)?;
            let mut cfg = EnvSampleConfig::new(layout.rooms, layout.surfaces);
            cfg.adversarial = adversarial;
            let env = sample_environment(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(seed))?;
            std::fs::write(&out, env.to_json()?)?;
            if let Some(svg) = svg {
                std::fs::write(svg, render_svg(&env, None, None))?;
            }
            println!(
                "{} rooms, {} surfaces, {} objects -> {}",
                env.rooms.len(),
                env.surfaces.len(),
                env.objects.len(),
                out.display()
            );
        }
        Command::Priors {
            action: PriorsAction::Fetch {
                env,
                objects,
                provider,
                dataset,
            },
        } => {
            let data = load_dataset(&dataset)?;
            let provider = build_provider(&provider, &data)?;
            let env = EnvironmentSpec::from_json(&std::fs::read_to_string(&env)?)?;
            let names: Vec<String> = match objects {
                Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
                None => env.objects.iter().map(|o| o.label.clone()).collect(),
            };
            let rooms: Vec<String> = env.rooms.iter().map(|r| display_name(&r.label)).collect();
            for name in &names {
                let object = display_name(name);
                if rooms.len() >= 2 {
                    let q = McqaQuery::new(object.clone(), rooms.clone(), McqaLevel::Room)?;
                    let rec = generate_prior(&provider, &q, None)?;
                    println!("{}", serde_json::to_string(&rec)?);
                }
                for (r, members) in env.room_surfaces().iter().enumerate() {
                    if members.len() < 2 {
                        continue;
                    }
                    let labels = members.iter().map(|&s| display_name(&env.surface(s).label)).collect();
                    let q = McqaQuery::new(object.clone(), labels, McqaLevel::Surface)?;
                    let rec = generate_prior(&provider, &q, Some(&rooms[r]))?;
                    println!("{}", serde_json::to_string(&rec)?);
                }
                describe_object_uses(&provider, &object)?;
            }
            colocation_matrix(&env, &provider)?;
            eprintln!(
                "{} backend calls, {} cache entries",
                provider.backend_calls(),
                provider.cache().len()
            );
        }
    }
    Ok(())
}
