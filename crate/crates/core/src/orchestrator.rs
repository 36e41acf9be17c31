//! The deduce, stage, solve, inject loop, plus multi-problem selection,
//! threshold relaxation and sequential re-planning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{
    parse_program, Constant, FunctionTable, GroundAtom, GroundLiteral, Interpretation, LogicError, Program, Reasoner,
};
use crate::solver::{solve, Solution, SolverError, Status};
use crate::staging::{
    build_ilp, stage, EvaluationContext, IlpInstance, ObjectiveSpec, StagedProblem, StagingConfig, StagingError,
};
use crate::triage::{scenario_functions, vocabulary, ResolvedScores, Scenario, C_RTD, C_SCR};

#[derive(Debug, Error)]
pub enum OrchestrationError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Staging(#[from] StagingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("the program stages no optimization problem")]
    NothingToOrchestrate,
    #[error("expected one staged problem, found {0}")]
    TooManyProblems(usize),
    #[error("cannot convert an infeasible solution to facts")]
    InfeasibleSolution,
    #[error("selection derived {count} selected problems; candidate values: {candidates}")]
    Selection { count: usize, candidates: String },
}

/// Solver result for problem `index` rendered as logic facts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeFacts {
    pub index: u32,
    pub facts: Vec<GroundLiteral>,
    pub objective_value: f64,
    pub status: Status,
}

impl OutcomeFacts {
    pub fn evacuated(&self) -> Vec<&str> {
        self.facts
            .iter()
            .filter(|f| f.atom.predicate == "evac")
            .filter_map(|f| f.atom.args[0].as_symbol())
            .collect()
    }
}

/// `evac`, `assign_a` and `assign_f` facts for every chosen triple. Index 0
/// uses the index-free forms.
pub fn solution_to_facts(solution: &Solution, index: u32) -> Result<Vec<GroundLiteral>, OrchestrationError> {
    if solution.status == Status::Infeasible {
        return Err(OrchestrationError::InfeasibleSolution);
    }
    let fact = |pred: &str, mut args: Vec<Constant>| {
        if index != 0 {
            args.push(Constant::num(f64::from(index)));
        }
        GroundLiteral::pos(GroundAtom::new(pred, args))
    };
    let mut out = Vec::with_capacity(solution.chosen.len() * 3);
    for t in &solution.chosen {
        out.push(fact("evac", vec![Constant::sym(&t.casualty)]));
        out.push(fact("assign_a", vec![Constant::sym(&t.casualty), Constant::sym(&t.asset)]));
        out.push(fact("assign_f", vec![Constant::sym(&t.casualty), Constant::sym(&t.facility)]));
    }
    Ok(out)
}

/// One staged problem with its compiled instance and solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemReport {
    pub staged: StagedProblem,
    pub ilp: IlpInstance,
    pub solution: Solution,
}

impl ProblemReport {
    pub fn outcome(&self) -> Result<OutcomeFacts, OrchestrationError> {
        let facts = match self.solution.status {
            Status::Infeasible => Vec::new(),
            Status::Optimal | Status::Feasible => solution_to_facts(&self.solution, self.staged.index)?,
        };
        Ok(OutcomeFacts {
            index: self.staged.index,
            facts,
            objective_value: self.solution.objective_value,
            status: self.solution.status,
        })
    }
}

/// Deduction, staging and solving for one scenario.
pub struct Orchestrator<'a> {
    pub scenario: &'a Scenario,
    pub functions: FunctionTable,
    pub config: StagingConfig,
}

impl<'a> Orchestrator<'a> {
    pub fn new(scenario: &'a Scenario, config: StagingConfig) -> Self {
        Orchestrator { scenario, functions: scenario_functions(scenario), config }
    }

    pub fn deduce(&self, program: &Program) -> Result<Interpretation, OrchestrationError> {
        Ok(Reasoner::new(&self.functions).fixpoint(program)?)
    }

    pub fn extend(
        &self,
        interp: &Interpretation,
        program: &Program,
        facts: &[GroundLiteral],
    ) -> Result<Interpretation, OrchestrationError> {
        Ok(Reasoner::new(&self.functions).extend(interp, program, facts)?)
    }

    pub fn stage(&self, interp: &Interpretation) -> Result<Vec<StagedProblem>, OrchestrationError> {
        Ok(stage(interp, self.scenario, &self.config.score_defaults)?)
    }

    pub fn solve(&self, staged: StagedProblem) -> Result<ProblemReport, OrchestrationError> {
        let ilp = build_ilp(&staged, self.scenario, &self.config);
        let solution = solve(&ilp)?;
        Ok(ProblemReport { staged, ilp, solution })
    }

    /// Deduce, stage exactly one problem, solve it and inject the result.
    pub fn run_single(&self, program: &Program) -> Result<SingleRun, OrchestrationError> {
        let interp = self.deduce(program)?;
        let mut staged = self.stage(&interp)?;
        match staged.len() {
            0 => return Err(OrchestrationError::NothingToOrchestrate),
            1 => {}
            n => return Err(OrchestrationError::TooManyProblems(n)),
        }
        let report = self.solve(staged.remove(0))?;
        let outcome = report.outcome()?;
        let interpretation = self.extend(&interp, program, &outcome.facts)?;
        Ok(SingleRun { interpretation, outcome, problem: report })
    }

    /// Solve every staged problem, inject all outcomes and cross-criteria
    /// values, and let the selection rules pick one problem.
    pub fn run_multi(&self, program: &Program, theta: f64) -> Result<MultiRun, OrchestrationError> {
        let mut program = program.clone();
        let has_selection = program.has_rule_for("selected")
            || program.facts.iter().any(|f| f.atom.predicate == "selected" && !f.negated);
        if !has_selection {
            for r in default_selection_rules() {
                program.add_rule(r);
            }
        }
        let interp = self.deduce(&program)?;
        let staged = self.stage(&interp)?;
        if staged.is_empty() {
            return Err(OrchestrationError::NothingToOrchestrate);
        }
        let problems = staged.into_iter().map(|sp| self.solve(sp)).collect::<Result<Vec<_>, _>>()?;
        let outcomes = problems.iter().map(ProblemReport::outcome).collect::<Result<Vec<_>, _>>()?;
        let values = cross_values(self.scenario, &problems);

        let mut facts: Vec<GroundLiteral> = outcomes.iter().flat_map(|o| o.facts.iter().cloned()).collect();
        facts.extend(value_facts(&values, theta));
        let optimal: Vec<u32> = problems.iter().filter(|p| p.solution.is_optimal()).map(|p| p.staged.index).collect();
        facts.extend(order_facts(&optimal));
        let interpretation = self.extend(&interp, &program, &facts)?;

        let selected: Vec<u32> = interpretation
            .true_atoms("selected", 1)
            .filter_map(|a| a.args[0].as_number())
            .map(|x| x as u32)
            .collect();
        if selected.len() != 1 {
            return Err(OrchestrationError::Selection { count: selected.len(), candidates: describe_values(&values) });
        }
        Ok(MultiRun { interpretation, problems, outcomes, values, selected: selected[0] })
    }

    /// Solve under each threshold of the ladder, strict to relaxed.
    pub fn relax_ladder(
        &self,
        program: &Program,
        family: ThresholdFamily,
        ladder: &[f64],
    ) -> Result<RelaxationResult, OrchestrationError> {
        let base = self.deduce(program)?;
        let index = match self.stage(&base)?.as_slice() {
            [] => return Err(OrchestrationError::NothingToOrchestrate),
            [one] => one.index,
            many => return Err(OrchestrationError::TooManyProblems(many.len())),
        };
        let mut attempts = Vec::with_capacity(ladder.len());
        for &k in ladder {
            let mut args = vec![Constant::sym(family.constant()), Constant::num(k)];
            if index != 0 {
                args.push(Constant::num(f64::from(index)));
            }
            let fact = GroundLiteral::pos(GroundAtom::new("use_c", args));
            let mut attempt_program = program.clone();
            attempt_program.add_fact(fact)?;
            let interp = self.deduce(&attempt_program)?;
            let mut staged = self.stage(&interp)?;
            let report = self.solve(staged.remove(0))?;
            attempts.push(RelaxationAttempt {
                k,
                status: report.solution.status,
                objective_value: report.solution.objective_value,
                forced: report.ilp.forced.len(),
                evacuated: report.solution.chosen.len(),
                solution: report.solution,
            });
        }
        let chosen_k = attempts.iter().find(|a| a.status == Status::Optimal).map(|a| a.k);
        Ok(RelaxationResult { family, ladder: ladder.to_vec(), chosen_k, attempts })
    }

    /// Event-driven re-planning: at time zero and whenever an asset comes
    /// back, expire casualties past their deadline and solve the residual
    /// scenario with the idle assets. `program_for` builds the full program
    /// for a residual scenario.
    pub fn run_sequential<F>(&self, program_for: F, options: &SequentialOptions) -> Result<MissionSchedule, OrchestrationError>
    where
        F: Fn(&Scenario) -> Program,
    {
        let full = self.deduce(&program_for(self.scenario))?;
        let scores = ResolvedScores::resolve(&full, self.scenario, &self.config.score_defaults);
        let mut pending: Vec<String> = self.scenario.casualties.iter().map(|c| c.name.clone()).collect();
        pending.sort();
        let mut assets: BTreeMap<String, AssetState> = self
            .scenario
            .assets
            .iter()
            .map(|a| (a.name.clone(), AssetState { location: a.location, free_at: 0.0, duty_left: a.duty_hours }))
            .collect();
        let mut schedule = MissionSchedule { horizon_hours: options.horizon_hours, ..Default::default() };
        let mut t = 0.0;
        loop {
            let (gone, alive): (Vec<String>, Vec<String>) =
                pending.into_iter().partition(|p| scores.lsi.get(p).is_some_and(|&lsi| t > lsi));
            schedule.expired.extend(gone);
            pending = alive;

            let idle: Vec<String> = assets
                .iter()
                .filter(|(_, s)| s.free_at <= t && s.duty_left > 0.0)
                .map(|(n, _)| n.clone())
                .collect();
            if !pending.is_empty() && !idle.is_empty() {
                let residual = Scenario {
                    casualties: self.scenario.casualties.iter().filter(|c| pending.contains(&c.name)).cloned().collect(),
                    assets: self
                        .scenario
                        .assets
                        .iter()
                        .filter(|a| idle.contains(&a.name))
                        .map(|a| {
                            let s = &assets[&a.name];
                            crate::triage::Asset { location: s.location, duty_hours: s.duty_left, ..a.clone() }
                        })
                        .collect(),
                    facilities: self.scenario.facilities.clone(),
                    seed: self.scenario.seed,
                };
                let round_config = StagingConfig { clock_offset_hours: t, ..self.config };
                let round = Orchestrator::new(&residual, round_config).run_single(&program_for(&residual))?;
                let mut missions = Vec::new();
                for triple in &round.problem.solution.chosen {
                    let v = round
                        .problem
                        .ilp
                        .variables
                        .iter()
                        .find(|v| &v.triple == triple)
                        .expect("chosen triples are variables");
                    let end = t + v.total_hours;
                    let state = assets.get_mut(&triple.asset).expect("known asset");
                    state.location = self.scenario.facility(&triple.facility).expect("known facility").location;
                    state.free_at = end + options.turnaround_hours;
                    state.duty_left = (state.duty_left - v.total_hours - options.turnaround_hours).max(0.0);
                    missions.push(Mission {
                        asset: triple.asset.clone(),
                        casualty: triple.casualty.clone(),
                        facility: triple.facility.clone(),
                        start: t,
                        end,
                        duty_before: residual.asset(&triple.asset).expect("idle asset").duty_hours,
                    });
                }
                if !missions.is_empty() {
                    let served: BTreeSet<&str> = missions.iter().map(|m| m.casualty.as_str()).collect();
                    pending.retain(|p| !served.contains(p.as_str()));
                    schedule.evacuated.extend(missions.iter().map(|m| m.casualty.clone()));
                    schedule.rounds.push(Round { start_time: t, outcome: round.outcome, missions });
                }
            }
            if pending.is_empty() {
                break;
            }
            let next = assets.values().map(|s| s.free_at).filter(|&f| f > t).fold(f64::INFINITY, f64::min);
            if !next.is_finite() || next > options.horizon_hours {
                break;
            }
            t = next;
        }
        // Nobody will reach the rest before the horizon ends or at all.
        let (gone, left): (Vec<String>, Vec<String>) =
            pending.into_iter().partition(|p| scores.lsi.get(p).is_some_and(|&lsi| lsi < options.horizon_hours));
        schedule.expired.extend(gone);
        schedule.unserved = left;
        schedule.expired.sort();
        Ok(schedule)
    }
}

struct AssetState {
    location: crate::triage::Location,
    free_at: f64,
    duty_left: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SingleRun {
    pub interpretation: Interpretation,
    pub outcome: OutcomeFacts,
    pub problem: ProblemReport,
}

/// Value of problem `index`'s solution under `objective`.
pub type CrossValues = BTreeMap<u32, BTreeMap<ObjectiveSpec, f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MultiRun {
    pub interpretation: Interpretation,
    pub problems: Vec<ProblemReport>,
    pub outcomes: Vec<OutcomeFacts>,
    pub values: CrossValues,
    pub selected: u32,
}

/// Every optimal solution evaluated under both objectives.
pub fn cross_values(scenario: &Scenario, problems: &[ProblemReport]) -> CrossValues {
    let mut out = CrossValues::new();
    for p in problems.iter().filter(|p| p.solution.is_optimal()) {
        let ctx = EvaluationContext { scenario, scores: &p.staged.scores, t_max: p.ilp.t_max };
        let row = ObjectiveSpec::ALL.iter().map(|&o| (o, ctx.evaluate_under(&p.solution.chosen, o))).collect();
        out.insert(p.staged.index, row);
    }
    out
}

fn value_facts(values: &CrossValues, theta: f64) -> Vec<GroundLiteral> {
    let num = |x: f64| Constant::num(x);
    let mut out = Vec::new();
    let mut best: BTreeMap<ObjectiveSpec, f64> = BTreeMap::new();
    for (&i, row) in values {
        for (&o, &v) in row {
            out.push(GroundLiteral::pos(GroundAtom::new(
                "value",
                vec![num(f64::from(i)), Constant::sym(o.constant()), num(v)],
            )));
            let b = best.entry(o).or_insert(v);
            *b = b.max(v);
        }
    }
    for (o, v) in best {
        out.push(GroundLiteral::pos(GroundAtom::new("best", vec![Constant::sym(o.constant()), num(v)])));
    }
    out.push(GroundLiteral::pos(GroundAtom::new("theta", vec![num(theta)])));
    out
}

fn order_facts(indices: &[u32]) -> Vec<GroundLiteral> {
    let num = |i: u32| Constant::num(f64::from(i));
    let mut out = Vec::new();
    if let (Some(&first), Some(&last)) = (indices.first(), indices.last()) {
        out.push(GroundLiteral::pos(GroundAtom::new("problem_first", vec![num(first)])));
        out.push(GroundLiteral::pos(GroundAtom::new("problem_last", vec![num(last)])));
    }
    for w in indices.windows(2) {
        out.push(GroundLiteral::pos(GroundAtom::new("problem_next", vec![num(w[0]), num(w[1])])));
    }
    out
}

fn describe_values(values: &CrossValues) -> String {
    let mut s = String::new();
    for (i, row) in values {
        let _ = write!(s, "[{i}:");
        for (o, v) in row {
            let _ = write!(s, " {}={v:.6}", o.constant());
        }
        s.push(']');
    }
    if s.is_empty() {
        s.push_str("none (no optimal problem)");
    }
    s
}

const SELECTION_RULES: &str = "
@sel_eligible eligible(I) :- value(I, o_scr, V), best(o_scr, M), theta(T), ge(V, mul(T, M)).
@sel_ineligible not eligible(I) :- value(I, o_scr, V), best(o_scr, M), theta(T), lt(V, mul(T, M)).
@sel_beats_more beats(J, I) :- eligible(J), value(J, o_rtd, VJ), value(I, o_rtd, VI), gt(VJ, VI).
@sel_beats_tie beats(J, I) :- eligible(J), value(J, o_rtd, V), value(I, o_rtd, V), lt(J, I).
@sel_ineligible_loses not beats(J, I) :- not eligible(J), value(I, o_rtd, VI).
@sel_less_loses not beats(J, I) :- eligible(J), value(J, o_rtd, VJ), value(I, o_rtd, VI), lt(VJ, VI).
@sel_tie_loses not beats(J, I) :- eligible(J), value(J, o_rtd, V), value(I, o_rtd, V), ge(J, I).
@sel_unbeaten_first unbeaten(I, J) :- value(I, o_rtd, VI), problem_first(J), not beats(J, I).
@sel_unbeaten_next unbeaten(I, K) :- unbeaten(I, J), problem_next(J, K), not beats(K, I).
@sel_selected selected(I) :- eligible(I), problem_last(J), unbeaten(I, J).
";

/// Default selection: among problems whose `o_scr` value is at least
/// `theta` times the best, the one with the largest `o_rtd` value, lowest
/// index on ties. No problem is beaten by itself, so `unbeaten` walks the
/// problem order and `selected` needs to survive every comparison.
pub fn default_selection_rules() -> Vec<crate::logic::Rule> {
    let mut src = vocabulary().to_string();
    src.push_str(SELECTION_RULES);
    parse_program(&src).expect("built-in selection rules parse").rules
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ThresholdFamily {
    ScrThreshold,
    RtdThreshold,
}

impl ThresholdFamily {
    pub fn constant(self) -> &'static str {
        match self {
            ThresholdFamily::ScrThreshold => C_SCR,
            ThresholdFamily::RtdThreshold => C_RTD,
        }
    }

    /// Strict to fully relaxed.
    pub fn default_ladder(self) -> Vec<f64> {
        match self {
            ThresholdFamily::ScrThreshold => vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            ThresholdFamily::RtdThreshold => vec![50.0, 40.0, 30.0, 20.0, 10.0, 0.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelaxationAttempt {
    pub k: f64,
    pub status: Status,
    pub objective_value: f64,
    pub forced: usize,
    pub evacuated: usize,
    pub solution: Solution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RelaxationResult {
    pub family: ThresholdFamily,
    pub ladder: Vec<f64>,
    /// First ladder entry with an optimal solution.
    pub chosen_k: Option<f64>,
    /// Every ladder entry, in ladder order.
    pub attempts: Vec<RelaxationAttempt>,
}

impl RelaxationResult {
    /// Ladder position of `chosen_k`.
    pub fn chosen_position(&self) -> Option<usize> {
        self.attempts.iter().position(|a| a.status == Status::Optimal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SequentialOptions {
    pub horizon_hours: f64,
    /// Ground time between missions.
    pub turnaround_hours: f64,
}

impl Default for SequentialOptions {
    fn default() -> Self {
        SequentialOptions { horizon_hours: 24.0, turnaround_hours: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Mission {
    pub asset: String,
    pub casualty: String,
    pub facility: String,
    pub start: f64,
    pub end: f64,
    /// Duty hours the asset had left when dispatched.
    pub duty_before: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Round {
    pub start_time: f64,
    pub outcome: OutcomeFacts,
    pub missions: Vec<Mission>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MissionSchedule {
    pub horizon_hours: f64,
    pub rounds: Vec<Round>,
    pub evacuated: Vec<String>,
    pub expired: Vec<String>,
    pub unserved: Vec<String>,
}

impl MissionSchedule {
    pub fn missions(&self) -> impl Iterator<Item = &Mission> {
        self.rounds.iter().flat_map(|r| r.missions.iter())
    }

    /// Gantt table: one row per mission.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["asset", "start", "end", "casualty", "facility"])?;
        for m in self.missions() {
            w.write_record([&m.asset, &m.start.to_string(), &m.end.to_string(), &m.casualty, &m.facility])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Checks the schedule invariants: no overlapping windows per asset,
    /// every mission within the duty hours left at dispatch, nobody served
    /// twice, and every casualty accounted for exactly once.
    pub fn validate(&self, scenario: &Scenario) -> Result<(), String> {
        let mut by_asset: BTreeMap<&str, Vec<&Mission>> = BTreeMap::new();
        for m in self.missions() {
            if m.end - m.start > m.duty_before + 1e-9 {
                return Err(format!("mission of {} for {} exceeds duty hours", m.asset, m.casualty));
            }
            by_asset.entry(&m.asset).or_default().push(m);
        }
        for (asset, mut ms) in by_asset {
            ms.sort_by(|a, b| a.start.total_cmp(&b.start));
            for w in ms.windows(2) {
                if w[1].start < w[0].end {
                    return Err(format!("asset {asset} has overlapping missions"));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for p in self.evacuated.iter().chain(&self.expired).chain(&self.unserved) {
            if !seen.insert(p.as_str()) {
                return Err(format!("casualty {p} accounted for twice"));
            }
        }
        if seen.len() != scenario.casualties.len() || scenario.casualties.iter().any(|c| !seen.contains(c.name.as_str())) {
            return Err("evacuated + expired + unserved does not match the casualty list".into());
        }
        Ok(())
    }
}

/// Export helper shared by the CLI and service.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("orchestration results serialize")
}
