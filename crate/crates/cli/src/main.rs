use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use medevac_core::logic::{explain, parse_atom};
use medevac_core::orchestrator::{to_json, ThresholdFamily};
use medevac_core::scenario_gen::{generate, load, save, BoundingBox, GenConfig};
use medevac_core::staging::StagingConfig;
use medevac_core::strategy::{RunMode, Strategy};
use medevac_core::triage::Scenario;
use medevac_harness::{
    averted, cross_criteria, run_grid, run_relaxation, summarize, summarize_relaxation, write_grid, write_relaxation,
    write_schedule, GridSpec, Method, RelaxSpec,
};

#[derive(Parser)]
#[command(name = "medevac", version, about = "Casualty evacuation planning with staged 0-1 programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario and write it as JSON.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a strategy on one scenario and print its outcome facts.
    Solve {
        #[command(flatten)]
        input: ScenarioArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long, default_value = "single")]
        mode: RunMode,
        /// Print the whole run result instead of the outcome facts.
        #[arg(long)]
        full: bool,
        /// Print the derivation of a ground atom after the run.
        #[arg(long, value_name = "ATOM")]
        explain: Option<String>,
    },
    /// Experiment grid: every method on every (asset count, seed) cell.
    Grid {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "results/grid")]
        out_dir: PathBuf,
    },
    /// Threshold relaxation ladders over the grid.
    Relax {
        #[command(flatten)]
        grid: GridArgs,
        /// scr, rtd or both.
        #[arg(long, default_value = "both")]
        family: String,
        #[arg(long, default_value = "results/relax")]
        out_dir: PathBuf,
    },
    /// Round-by-round schedule on one scenario, with a Gantt chart.
    Sequential {
        #[command(flatten)]
        input: ScenarioArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long, default_value = "results/sequential")]
        out_dir: PathBuf,
    },
    /// HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "medevac-data")]
        data_dir: PathBuf,
    },
}

/// Generator settings besides counts and seed.
#[derive(Args, Clone)]
struct GenExtra {
    #[arg(long, default_value_t = BoundingBox::SOUTHWEST.lat_min, allow_negative_numbers = true)]
    lat_min: f64,
    #[arg(long, default_value_t = BoundingBox::SOUTHWEST.lat_max, allow_negative_numbers = true)]
    lat_max: f64,
    #[arg(long, default_value_t = BoundingBox::SOUTHWEST.lon_min, allow_negative_numbers = true)]
    lon_min: f64,
    #[arg(long, default_value_t = BoundingBox::SOUTHWEST.lon_max, allow_negative_numbers = true)]
    lon_max: f64,
    #[arg(long, default_value_t = 0.1)]
    vitals_missing_prob: f64,
    #[arg(long, default_value_t = 0.1)]
    insults_missing_prob: f64,
}

#[derive(Args, Clone)]
struct GenArgs {
    /// Casualties.
    #[arg(long, default_value_t = 25)]
    n: usize,
    /// Facilities.
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Assets.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    extra: GenExtra,
}

impl GenExtra {
    fn config(&self, n: usize, m: usize, k: usize, seed: u64) -> GenConfig {
        GenConfig {
            n,
            m,
            k,
            seed,
            bounding_box: BoundingBox { lat_min: self.lat_min, lat_max: self.lat_max, lon_min: self.lon_min, lon_max: self.lon_max },
            vitals_missing_prob: self.vitals_missing_prob,
            insults_missing_prob: self.insults_missing_prob,
        }
    }
}

impl GenArgs {
    fn config(&self) -> GenConfig {
        self.extra.config(self.n, self.m, self.k, self.seed)
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file; generated from the generator flags when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        Ok(match &self.scenario {
            Some(path) => load(path)?,
            None => generate(&self.gen.config())?,
        })
    }
}

#[derive(Args)]
struct StrategyArgs {
    /// Strategy JSON file.
    #[arg(long, conflicts_with = "method")]
    strategy: Option<PathBuf>,
    /// Preset strategy: urgency, reverse or situational.
    #[arg(long, default_value = "urgency")]
    method: String,
}

impl StrategyArgs {
    fn load(&self) -> Result<Strategy> {
        match &self.strategy {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let s: Strategy = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                s.validate()?;
                Ok(s)
            }
            None => Strategy::preset(&self.method)
                .with_context(|| format!("unknown method {}, expected urgency, reverse or situational", self.method)),
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 25)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    k_min: usize,
    #[arg(long, default_value_t = 25)]
    k_max: usize,
    /// Samples per asset count.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Base seed; sample s with k assets uses seed + 1000k + s.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Methods to run (repeatable); all when omitted.
    #[arg(long)]
    method: Vec<Method>,
    /// Run cells on all cores.
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    extra: GenExtra,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            m: self.m,
            ks: (self.k_min..=self.k_max).collect(),
            seeds: self.seeds,
            base_seed: self.seed,
            methods: if self.method.is_empty() { Method::ALL.to_vec() } else { self.method.clone() },
            gen: self.extra.config(self.n, self.m, 0, self.seed),
            parallel: self.parallel,
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { gen, out } => {
            let scenario = generate(&gen.config())?;
            match out {
                Some(path) => save(&scenario, &path)?,
                None => println!("{}", to_json(&scenario)),
            }
        }
        Command::Solve { input, strategy, mode, full, explain: atom } => {
            let scenario = input.load()?;
            let artifacts = strategy.load()?.execute(&scenario, mode, StagingConfig::default())?;
            if full {
                println!("{}", to_json(&artifacts.result));
            } else {
                println!("{}", to_json(&artifacts.result.outcome_facts()));
            }
            if let Some(text) = atom {
                let Some(interp) = &artifacts.interpretation else {
                    bail!("{mode:?} runs keep no interpretation to explain");
                };
                let atom = parse_atom(&text)?.to_ground().with_context(|| format!("{text} is not ground"))?;
                eprint!("{}", explain(interp, &atom)?);
            }
        }
        Command::Grid { grid, out_dir } => {
            let results = run_grid(&grid.spec())?;
            write_grid(&out_dir, &results)?;
            println!("{:<12} {:>10} {:>10}", "method", "evacuated", "total scr");
            for row in summarize(&results.metrics).iter().filter(|r| r.k.is_none()) {
                println!("{:<12} {:>10.2} {:>10.2}", row.method, row.mean_evacuated, row.mean_total_scr);
            }
            for baseline in [Method::B1, Method::B2, Method::B3] {
                if results.metrics.iter().any(|r| r.method == baseline) && results.metrics.iter().any(|r| r.method == Method::Urgency) {
                    println!("casualties averted by urgency vs {baseline}: {:.1}%", 100.0 * averted(&results.metrics, Method::Urgency, baseline));
                }
            }
            for c in cross_criteria(&results.metrics) {
                println!("{} under {:?}: {:.3} of optimum", c.solved_by, c.evaluated_under, c.mean_ratio);
            }
            println!("wrote {}", out_dir.display());
        }
        Command::Relax { grid, family, out_dir } => {
            let families = match family.as_str() {
                "scr" => vec![ThresholdFamily::ScrThreshold],
                "rtd" => vec![ThresholdFamily::RtdThreshold],
                "both" => vec![ThresholdFamily::ScrThreshold, ThresholdFamily::RtdThreshold],
                other => bail!("unknown family {other}, expected scr, rtd or both"),
            };
            let rows = run_relaxation(&RelaxSpec { grid: grid.spec(), families, ..RelaxSpec::standard() })?;
            write_relaxation(&out_dir, &rows)?;
            println!("{:<6} {:<8} {:>10} {:>10}", "assets", "family", "chosen k", "violations");
            for r in summarize_relaxation(&rows) {
                println!("{:<6} {:<8} {:>10.3} {:>10}", r.k, r.family.constant(), r.mean_chosen_k, r.violations);
            }
            println!("wrote {}", out_dir.display());
        }
        Command::Sequential { input, strategy, out_dir } => {
            let scenario = input.load()?;
            let strategy = strategy.load()?;
            let artifacts = strategy.execute(&scenario, RunMode::Sequential, StagingConfig::default())?;
            let medevac_core::strategy::RunResult::Sequential(schedule) = artifacts.result else {
                unreachable!("sequential mode yields a schedule")
            };
            if let Err(e) = schedule.validate(&scenario) {
                bail!("schedule failed validation: {e}");
            }
            write_schedule(&out_dir, &schedule)?;
            println!(
                "{} rounds, {} evacuated, {} expired, {} unserved; wrote {}",
                schedule.rounds.len(),
                schedule.evacuated.len(),
                schedule.expired.len(),
                schedule.unserved.len(),
                out_dir.display()
            );
        }
        Command::Serve { port, host, data_dir } => {
            let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
            eprintln!("listening on http://{addr}, data in {}", data_dir.display());
            tokio::runtime::Runtime::new()?.block_on(medevac_service::serve(addr, data_dir))?;
        }
    }
    Ok(())
}
