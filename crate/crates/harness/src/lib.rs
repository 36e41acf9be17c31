//! Experiment grid over generated scenarios: optimizing methods against the
//! greedy baselines, threshold relaxation ladders and sequential schedules.
//! Metric tables are deterministic; wall times go to a separate table.

pub mod plot;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use medevac_core::baselines::Baseline;
use medevac_core::orchestrator::{MissionSchedule, OrchestrationError, Orchestrator, ThresholdFamily};
use medevac_core::scenario_gen::{generate, GenConfig, GenError};
use medevac_core::solver::Status;
use medevac_core::staging::{ConstraintSpec, EvaluationContext, ObjectiveSpec, StagingConfig, Triple};
use medevac_core::strategy::{RunMode, RunResult, Strategy, StrategyError};
use medevac_core::triage::Scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Orchestration(#[from] OrchestrationError),
    #[error("k={k} seed={seed}: {message}")]
    Scenario { k: usize, seed: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Urgency,
    Reverse,
    Situational,
    B1,
    B2,
    B3,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Urgency, Method::Reverse, Method::Situational, Method::B1, Method::B2, Method::B3];

    pub fn strategy(self) -> Option<Strategy> {
        match self {
            Method::Urgency => Some(Strategy::urgency()),
            Method::Reverse => Some(Strategy::reverse()),
            Method::Situational => Some(Strategy::situational()),
            _ => None,
        }
    }

    pub fn baseline(self) -> Option<Baseline> {
        match self {
            Method::B1 => Some(Baseline::B1),
            Method::B2 => Some(Baseline::B2),
            Method::B3 => Some(Baseline::B3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Urgency => "urgency",
            Method::Reverse => "reverse",
            Method::Situational => "situational",
            Method::B1 => "b1",
            Method::B2 => "b2",
            Method::B3 => "b3",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s}, expected urgency, reverse, situational, b1, b2 or b3"))
    }
}

/// Seed of sample `s` in the cell with `k` assets.
pub fn cell_seed(base: u64, k: usize, s: u64) -> u64 {
    base + 1000 * k as u64 + s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
    pub ks: Vec<usize>,
    pub seeds: u64,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    /// Template for everything but counts and seed.
    pub gen: GenConfig,
    /// Run cells on all cores. Timings are then taken under contention.
    pub parallel: bool,
}

impl GridSpec {
    /// 25 casualties, 10 facilities, 1 to 25 assets, 10 samples per cell.
    pub fn standard() -> Self {
        GridSpec {
            n: 25,
            m: 10,
            ks: (1..=25).collect(),
            seeds: 10,
            base_seed: 0,
            methods: Method::ALL.to_vec(),
            gen: GenConfig::default(),
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.ks.is_empty() {
            return Err(HarnessError::InvalidSpec("asset range is empty".into()));
        }
        if self.seeds == 0 {
            return Err(HarnessError::InvalidSpec("need at least one seed per cell".into()));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::InvalidSpec("no methods".into()));
        }
        self.gen.validate()?;
        Ok(())
    }

    pub fn cells(&self) -> Vec<(usize, u64)> {
        self.ks.iter().flat_map(|&k| (0..self.seeds).map(move |s| (k, cell_seed(self.base_seed, k, s)))).collect()
    }

    pub fn scenario(&self, k: usize, seed: u64) -> Result<Scenario, GenError> {
        generate(&GenConfig { n: self.n, m: self.m, k, seed, ..self.gen.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricRow {
    pub k: usize,
    pub seed: u64,
    pub method: Method,
    pub status: Status,
    pub evacuated: usize,
    /// Casualties in the scenario left behind.
    pub unserved: usize,
    /// Sum of triage scores of evacuated casualties.
    pub total_scr: f64,
    /// Assignment value under the urgency objective.
    pub scr_value: f64,
    /// Assignment value under the reverse-triage objective.
    pub rtd_value: f64,
    pub scr_scaled: i64,
    pub rtd_scaled: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimingRow {
    pub k: usize,
    pub seed: u64,
    pub method: Method,
    pub deduce_ms: f64,
    /// Staging plus solving, or the baseline's run.
    pub solve_ms: f64,
    pub nodes: u64,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// All methods on one scenario. Every assignment is valued in the same
/// context: the deadline-only instance's scores and normalization.
pub fn evaluate_scenario(
    scenario: &Scenario,
    k: usize,
    seed: u64,
    methods: &[Method],
    config: &StagingConfig,
) -> Result<(Vec<MetricRow>, Vec<TimingRow>), HarnessError> {
    let orch = Orchestrator::new(scenario, *config);
    let solve_with = |strategy: Strategy| -> Result<_, HarnessError> {
        let program = strategy.program(scenario)?;
        let t = Instant::now();
        let interp = orch.deduce(&program)?;
        let deduce_ms = ms(t);
        let t = Instant::now();
        let mut staged = orch.stage(&interp)?;
        let report = orch.solve(staged.remove(0))?;
        Ok((report, deduce_ms, ms(t)))
    };
    let (reference, ref_deduce_ms, ref_solve_ms) = solve_with(Strategy::urgency())?;
    let scores = &reference.staged.scores;
    let ctx = EvaluationContext { scenario, scores, t_max: reference.ilp.t_max };

    let mut metrics = Vec::with_capacity(methods.len());
    let mut timings = Vec::with_capacity(methods.len());
    for &method in methods {
        let (chosen, status, deduce_ms, solve_ms, nodes): (Vec<Triple>, Status, f64, f64, u64) =
            match (method.strategy(), method.baseline()) {
                (Some(_), _) if method == Method::Urgency => (
                    reference.solution.chosen.clone(),
                    reference.solution.status,
                    ref_deduce_ms,
                    ref_solve_ms,
                    reference.solution.node_count,
                ),
                (Some(strategy), _) => {
                    let (report, d, s) = solve_with(strategy)?;
                    (report.solution.chosen, report.solution.status, d, s, report.solution.node_count)
                }
                (None, Some(b)) => {
                    let t = Instant::now();
                    let sol = b.run(&reference.ilp, &scores.scr, &scores.rtd, seed);
                    (sol.chosen, sol.status, 0.0, ms(t), 0)
                }
                (None, None) => unreachable!("every method optimizes or is a baseline"),
            };
        metrics.push(MetricRow {
            k,
            seed,
            method,
            status,
            evacuated: chosen.len(),
            unserved: scenario.casualties.len() - chosen.len(),
            total_scr: chosen.iter().map(|t| scores.scr[&t.casualty]).fold(0.0, |a, s| a + s),
            scr_value: ctx.evaluate_under(&chosen, ObjectiveSpec::Urgency),
            rtd_value: ctx.evaluate_under(&chosen, ObjectiveSpec::ReverseTriage),
            scr_scaled: ctx.evaluate_scaled(&chosen, ObjectiveSpec::Urgency),
            rtd_scaled: ctx.evaluate_scaled(&chosen, ObjectiveSpec::ReverseTriage),
        });
        timings.push(TimingRow { k, seed, method, deduce_ms, solve_ms, nodes });
    }
    Ok((metrics, timings))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridResults {
    pub metrics: Vec<MetricRow>,
    pub timings: Vec<TimingRow>,
}

fn map_cells<T: Send>(
    cells: &[(usize, u64)],
    parallel: bool,
    f: impl Fn(usize, u64) -> Result<T, HarnessError> + Sync,
) -> Result<Vec<T>, HarnessError> {
    if parallel {
        cells.par_iter().map(|&(k, seed)| f(k, seed)).collect()
    } else {
        cells.iter().map(|&(k, seed)| f(k, seed)).collect()
    }
}

pub fn run_grid(spec: &GridSpec) -> Result<GridResults, HarnessError> {
    spec.validate()?;
    let config = StagingConfig::default();
    let per_cell = map_cells(&spec.cells(), spec.parallel, |k, seed| {
        let scenario = spec.scenario(k, seed)?;
        evaluate_scenario(&scenario, k, seed, &spec.methods, &config)
            .map_err(|e| HarnessError::Scenario { k, seed, message: e.to_string() })
    })?;
    let mut out = GridResults::default();
    for (m, t) in per_cell {
        out.metrics.extend(m);
        out.timings.extend(t);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    /// Asset count, or `None` for the whole grid.
    pub k: Option<usize>,
    pub method: Method,
    pub samples: usize,
    pub mean_evacuated: f64,
    pub mean_total_scr: f64,
    pub mean_scr_value: f64,
    pub mean_rtd_value: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn summary_row(k: Option<usize>, method: Method, rows: &[&MetricRow]) -> SummaryRow {
    SummaryRow {
        k,
        method,
        samples: rows.len(),
        mean_evacuated: mean(rows.iter().map(|r| r.evacuated as f64)),
        mean_total_scr: mean(rows.iter().map(|r| r.total_scr)),
        mean_scr_value: mean(rows.iter().map(|r| r.scr_value)),
        mean_rtd_value: mean(rows.iter().map(|r| r.rtd_value)),
    }
}

/// Means per (asset count, method), then per method over the whole grid.
pub fn summarize(metrics: &[MetricRow]) -> Vec<SummaryRow> {
    let mut by_cell: BTreeMap<(usize, Method), Vec<&MetricRow>> = BTreeMap::new();
    let mut by_method: BTreeMap<Method, Vec<&MetricRow>> = BTreeMap::new();
    for r in metrics {
        by_cell.entry((r.k, r.method)).or_default().push(r);
        by_method.entry(r.method).or_default().push(r);
    }
    let mut out: Vec<SummaryRow> = by_cell.iter().map(|(&(k, m), rows)| summary_row(Some(k), m, rows)).collect();
    out.extend(by_method.iter().map(|(&m, rows)| summary_row(None, m, rows)));
    out
}

/// Mean over scenarios of `(baseline unserved - method unserved) /
/// baseline unserved`, skipping scenarios where the baseline served
/// everyone.
pub fn averted(metrics: &[MetricRow], method: Method, baseline: Method) -> f64 {
    let by_cell = |m: Method| -> BTreeMap<(usize, u64), usize> {
        metrics.iter().filter(|r| r.method == m).map(|r| ((r.k, r.seed), r.unserved)).collect()
    };
    let (ours, theirs) = (by_cell(method), by_cell(baseline));
    mean(theirs.iter().filter(|(_, &b)| b > 0).filter_map(|(cell, &b)| {
        ours.get(cell).map(|&o| (b as f64 - o as f64) / b as f64)
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CrossCriteriaRow {
    pub solved_by: Method,
    pub evaluated_under: ObjectiveSpec,
    /// Mean of value / best value under that objective.
    pub mean_ratio: f64,
}

/// How urgency and reverse solutions fare under each other's objective,
/// relative to the optimum for that objective.
pub fn cross_criteria(metrics: &[MetricRow]) -> Vec<CrossCriteriaRow> {
    let best = |m: Method, r: &MetricRow, o: ObjectiveSpec| -> Option<f64> {
        let opt = metrics.iter().find(|x| x.k == r.k && x.seed == r.seed && x.method == m)?;
        let v = match o {
            ObjectiveSpec::Urgency => opt.scr_value,
            ObjectiveSpec::ReverseTriage => opt.rtd_value,
        };
        (v > 0.0).then_some(v)
    };
    let mut out = Vec::new();
    for solved_by in [Method::Urgency, Method::Reverse] {
        for (evaluated_under, optimum) in
            [(ObjectiveSpec::Urgency, Method::Urgency), (ObjectiveSpec::ReverseTriage, Method::Reverse)]
        {
            let ratios = metrics.iter().filter(|r| r.method == solved_by).filter_map(|r| {
                let v = match evaluated_under {
                    ObjectiveSpec::Urgency => r.scr_value,
                    ObjectiveSpec::ReverseTriage => r.rtd_value,
                };
                best(optimum, r, evaluated_under).map(|b| v / b)
            });
            out.push(CrossCriteriaRow { solved_by, evaluated_under, mean_ratio: mean(ratios) });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelaxSpec {
    pub grid: GridSpec,
    pub families: Vec<ThresholdFamily>,
    /// Constraints kept on every rung besides the threshold itself.
    pub base_constraints: Vec<ConstraintSpec>,
}

impl RelaxSpec {
    pub fn standard() -> Self {
        RelaxSpec {
            grid: GridSpec::standard(),
            families: vec![ThresholdFamily::ScrThreshold, ThresholdFamily::RtdThreshold],
            base_constraints: vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelaxRow {
    pub k: usize,
    pub seed: u64,
    pub family: ThresholdFamily,
    pub chosen_k: Option<f64>,
    /// Ladder position of `chosen_k`; the ladder length when none fits.
    pub position: usize,
    /// One letter per rung: `O` optimal, `I` infeasible.
    pub pattern: String,
    pub monotone: bool,
}

fn family_objective(family: ThresholdFamily) -> ObjectiveSpec {
    match family {
        ThresholdFamily::ScrThreshold => ObjectiveSpec::Urgency,
        ThresholdFamily::RtdThreshold => ObjectiveSpec::ReverseTriage,
    }
}

pub fn relax_scenario(
    scenario: &Scenario,
    k: usize,
    seed: u64,
    spec: &RelaxSpec,
) -> Result<Vec<RelaxRow>, HarnessError> {
    let mut rows = Vec::new();
    for &family in &spec.families {
        let mut strategy = Strategy::single(family_objective(family), &spec.base_constraints);
        strategy.relaxation.family = family;
        let RunResult::Relax(r) = strategy.execute(scenario, RunMode::Relax, StagingConfig::default())?.result else {
            unreachable!("relax mode yields a relaxation result")
        };
        let pattern: String =
            r.attempts.iter().map(|a| if a.status == Status::Infeasible { 'I' } else { 'O' }).collect();
        let monotone = !pattern.contains("OI");
        rows.push(RelaxRow {
            k,
            seed,
            family,
            chosen_k: r.chosen_k,
            position: r.chosen_position().unwrap_or(r.ladder.len()),
            pattern,
            monotone,
        });
    }
    Ok(rows)
}

pub fn run_relaxation(spec: &RelaxSpec) -> Result<Vec<RelaxRow>, HarnessError> {
    spec.grid.validate()?;
    let per_cell = map_cells(&spec.grid.cells(), spec.grid.parallel, |k, seed| {
        let scenario = spec.grid.scenario(k, seed)?;
        relax_scenario(&scenario, k, seed, spec).map_err(|e| HarnessError::Scenario { k, seed, message: e.to_string() })
    })?;
    Ok(per_cell.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelaxSummaryRow {
    pub k: usize,
    pub family: ThresholdFamily,
    pub mean_chosen_k: f64,
    pub mean_position: f64,
    pub violations: usize,
}

/// Mean chosen threshold per asset count. Runs where no rung fits count as
/// the last rung.
pub fn summarize_relaxation(rows: &[RelaxRow]) -> Vec<RelaxSummaryRow> {
    let mut groups: BTreeMap<(usize, u8), Vec<&RelaxRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.k, r.family as u8)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|rs| {
            let family = rs[0].family;
            let last = *family.default_ladder().last().expect("non-empty ladder");
            RelaxSummaryRow {
                k: rs[0].k,
                family,
                mean_chosen_k: mean(rs.iter().map(|r| r.chosen_k.unwrap_or(last))),
                mean_position: mean(rs.iter().map(|r| r.position.min(family.default_ladder().len() - 1) as f64)),
                violations: rs.iter().filter(|r| !r.monotone).count(),
            }
        })
        .collect()
}

/// Urgency strategy run round by round on one generated scenario.
pub fn run_sequential(cfg: &GenConfig, strategy: &Strategy) -> Result<(Scenario, MissionSchedule), HarnessError> {
    let scenario = generate(cfg)?;
    let RunResult::Sequential(schedule) = strategy.execute(&scenario, RunMode::Sequential, StagingConfig::default())?.result
    else {
        unreachable!("sequential mode yields a schedule")
    };
    schedule
        .validate(&scenario)
        .map_err(|message| HarnessError::Scenario { k: cfg.k, seed: cfg.seed, message })?;
    Ok((scenario, schedule))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Writes metrics.csv, summary.csv, cross_criteria.csv and timings.csv,
/// then the plots read back from them.
pub fn write_grid(dir: &Path, results: &GridResults) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("metrics.csv"), &results.metrics)?;
    write_csv(&dir.join("summary.csv"), &summarize(&results.metrics))?;
    write_csv(&dir.join("cross_criteria.csv"), &cross_criteria(&results.metrics))?;
    write_csv(&dir.join("timings.csv"), &results.timings)?;
    plot::grid_plots(dir)
}

pub fn write_relaxation(dir: &Path, rows: &[RelaxRow]) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("relaxation.csv"), rows)?;
    write_csv(&dir.join("relaxation_summary.csv"), &summarize_relaxation(rows))?;
    plot::relaxation_plot(dir)
}

pub fn write_schedule(dir: &Path, schedule: &MissionSchedule) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("schedule.csv"), schedule.to_csv()?)?;
    plot::gantt_plot(dir)
}
