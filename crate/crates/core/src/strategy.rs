//! Operator-facing strategies: objectives and constraints per problem index,
//! compiled into `use_o`/`use_c` facts, plus the knobs for each run mode.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Constant, GroundAtom, GroundLiteral, Interpretation, LogicError, Program};
use crate::orchestrator::{
    CrossValues, MissionSchedule, OrchestrationError, Orchestrator, OutcomeFacts, ProblemReport, RelaxationResult,
    SequentialOptions, ThresholdFamily,
};
use crate::staging::{ConstraintSpec, ObjectiveSpec, StagingConfig};
use crate::triage::{extend_program, scenario_program, Scenario};

pub const DEFAULT_THETA: f64 = 0.66;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("strategy has no objectives")]
    NoObjectives,
    #[error("problem indices must run 1..={expected} without gaps, found {found:?}")]
    NonContiguous { expected: usize, found: Vec<u32> },
    #[error("problem {0} has more than one objective")]
    DuplicateObjective(u32),
    #[error("constraint on problem {0}, which has no objective")]
    OrphanConstraint(u32),
    #[error("threshold {0} is not a finite non-negative number")]
    BadThreshold(f64),
    #[error("selection theta {0} is outside [0, 1]")]
    BadTheta(f64),
    #[error("relaxation ladder is empty")]
    EmptyLadder,
    #[error("pinned selection {0} is not a problem index")]
    BadPinnedSelection(u32),
    #[error("{mode} runs need exactly one objective, strategy has {count}")]
    NeedsOneObjective { mode: &'static str, count: usize },
    #[error("extra rules: {0}")]
    Rules(#[from] LogicError),
    #[error(transparent)]
    Orchestration(#[from] OrchestrationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedObjective {
    pub index: u32,
    pub objective: ObjectiveSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedConstraint {
    pub index: u32,
    #[serde(flatten)]
    pub constraint: ConstraintSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RelaxationOptions {
    pub family: ThresholdFamily,
    pub scr_ladder: Vec<f64>,
    pub rtd_ladder: Vec<f64>,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        RelaxationOptions {
            family: ThresholdFamily::ScrThreshold,
            scr_ladder: ThresholdFamily::ScrThreshold.default_ladder(),
            rtd_ladder: ThresholdFamily::RtdThreshold.default_ladder(),
        }
    }
}

impl RelaxationOptions {
    pub fn ladder(&self) -> &[f64] {
        match self.family {
            ThresholdFamily::ScrThreshold => &self.scr_ladder,
            ThresholdFamily::RtdThreshold => &self.rtd_ladder,
        }
    }
}

fn default_theta() -> f64 {
    DEFAULT_THETA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Strategy {
    pub objectives: Vec<IndexedObjective>,
    #[serde(default)]
    pub constraints: Vec<IndexedConstraint>,
    #[serde(default = "default_theta")]
    pub selection_theta: f64,
    #[serde(default)]
    pub relaxation: RelaxationOptions,
    #[serde(default)]
    pub sequential: SequentialOptions,
    /// Forces `selected(i)` in multi runs instead of the default rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinned_selection: Option<u32>,
    /// Additional facts and rules in the text syntax.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<String>,
}

impl Strategy {
    /// One problem with the given objective and constraints at index 1.
    pub fn single(objective: ObjectiveSpec, constraints: &[ConstraintSpec]) -> Self {
        Strategy {
            objectives: vec![IndexedObjective { index: 1, objective }],
            constraints: constraints.iter().map(|&constraint| IndexedConstraint { index: 1, constraint }).collect(),
            selection_theta: DEFAULT_THETA,
            relaxation: RelaxationOptions::default(),
            sequential: SequentialOptions::default(),
            pinned_selection: None,
            rules: None,
        }
    }

    /// Maximize triage score subject to the intervention deadline.
    pub fn urgency() -> Self {
        Self::single(ObjectiveSpec::Urgency, &[ConstraintSpec::Lsi])
    }

    /// Favor quick return to duty subject to the intervention deadline.
    pub fn reverse() -> Self {
        Self::single(ObjectiveSpec::ReverseTriage, &[ConstraintSpec::Lsi])
    }

    /// Urgency with each flight leg capped at one hour.
    pub fn situational() -> Self {
        Self::single(ObjectiveSpec::Urgency, &[ConstraintSpec::Lsi, ConstraintSpec::AirTime { k: 1.0 }])
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "urgency" => Some(Self::urgency()),
            "reverse" => Some(Self::reverse()),
            "situational" => Some(Self::situational()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if self.objectives.is_empty() {
            return Err(StrategyError::NoObjectives);
        }
        let mut seen = BTreeSet::new();
        for o in &self.objectives {
            if !seen.insert(o.index) {
                return Err(StrategyError::DuplicateObjective(o.index));
            }
        }
        let n = seen.len();
        if seen.iter().copied().ne(1..=n as u32) {
            return Err(StrategyError::NonContiguous { expected: n, found: seen.into_iter().collect() });
        }
        for c in &self.constraints {
            if !seen.contains(&c.index) {
                return Err(StrategyError::OrphanConstraint(c.index));
            }
            if let Some(k) = c.constraint.threshold() {
                if !k.is_finite() || k < 0.0 {
                    return Err(StrategyError::BadThreshold(k));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.selection_theta) {
            return Err(StrategyError::BadTheta(self.selection_theta));
        }
        for ladder in [&self.relaxation.scr_ladder, &self.relaxation.rtd_ladder] {
            if ladder.is_empty() {
                return Err(StrategyError::EmptyLadder);
            }
            if let Some(&k) = ladder.iter().find(|k| !k.is_finite() || **k < 0.0) {
                return Err(StrategyError::BadThreshold(k));
            }
        }
        if let Some(i) = self.pinned_selection {
            if !seen.contains(&i) {
                return Err(StrategyError::BadPinnedSelection(i));
            }
        }
        Ok(())
    }

    /// `use_o(o, i)` for each objective, then `use_c(c_lsi, i)` or
    /// `use_c(c, k, i)` for each constraint, in index order.
    pub fn compile_facts(&self) -> Vec<GroundLiteral> {
        let num = |x: f64| Constant::num(x);
        let mut by_index: BTreeMap<u32, Vec<GroundLiteral>> = BTreeMap::new();
        for o in &self.objectives {
            let atom = GroundAtom::new("use_o", vec![Constant::sym(o.objective.constant()), num(f64::from(o.index))]);
            by_index.entry(o.index).or_default().push(GroundLiteral::pos(atom));
        }
        for c in &self.constraints {
            let mut args = vec![Constant::sym(c.constraint.constant())];
            args.extend(c.constraint.threshold().map(num));
            args.push(num(f64::from(c.index)));
            by_index.entry(c.index).or_default().push(GroundLiteral::pos(GroundAtom::new("use_c", args)));
        }
        by_index.into_values().flatten().collect()
    }

    /// Scenario program plus the compiled facts and any extra rules.
    pub fn program(&self, scenario: &Scenario) -> Result<Program, StrategyError> {
        self.program_with(scenario, |_| true)
    }

    fn program_with(
        &self,
        scenario: &Scenario,
        keep: impl Fn(&GroundLiteral) -> bool,
    ) -> Result<Program, StrategyError> {
        self.validate()?;
        let mut p = scenario_program(scenario);
        for f in self.compile_facts().into_iter().filter(|f| keep(f)) {
            p.add_fact(f)?;
        }
        if let Some(text) = &self.rules {
            extend_program(&mut p, text)?;
        }
        Ok(p)
    }

    fn single_objective(&self, mode: &'static str) -> Result<(), StrategyError> {
        match self.objectives.len() {
            1 => Ok(()),
            count => Err(StrategyError::NeedsOneObjective { mode, count }),
        }
    }

    /// Runs the strategy against a scenario in the given mode.
    pub fn execute(&self, scenario: &Scenario, mode: RunMode, config: StagingConfig) -> Result<RunArtifacts, StrategyError> {
        let orch = Orchestrator::new(scenario, config);
        Ok(match mode {
            RunMode::Single => {
                self.single_objective("single")?;
                let run = orch.run_single(&self.program(scenario)?)?;
                RunArtifacts {
                    result: RunResult::Single { outcome: run.outcome },
                    interpretation: Some(run.interpretation),
                    problems: vec![run.problem],
                }
            }
            RunMode::Multi => {
                let mut program = self.program(scenario)?;
                if let Some(i) = self.pinned_selection {
                    program.add_fact(GroundLiteral::pos(GroundAtom::new("selected", vec![Constant::num(f64::from(i))])))?;
                }
                let run = orch.run_multi(&program, self.selection_theta)?;
                RunArtifacts {
                    result: RunResult::Multi { outcomes: run.outcomes, values: run.values, selected: run.selected },
                    interpretation: Some(run.interpretation),
                    problems: run.problems,
                }
            }
            RunMode::Relax => {
                self.single_objective("relax")?;
                // The ladder supplies this family's threshold itself.
                let family = self.relaxation.family.constant();
                let program = self.program_with(scenario, |f| {
                    !(f.atom.predicate == "use_c" && f.atom.args[0].as_symbol() == Some(family))
                })?;
                let result = orch.relax_ladder(&program, self.relaxation.family, self.relaxation.ladder())?;
                RunArtifacts { result: RunResult::Relax(result), interpretation: None, problems: vec![] }
            }
            RunMode::Sequential => {
                self.single_objective("sequential")?;
                self.validate()?;
                let schedule = orch.run_sequential(
                    |s| self.program(s).expect("validated strategy compiles for every residual scenario"),
                    &self.sequential,
                )?;
                RunArtifacts { result: RunResult::Sequential(schedule), interpretation: None, problems: vec![] }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RunMode {
    Single,
    Multi,
    Relax,
    Sequential,
}

impl std::str::FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown mode {s}, expected single, multi, relax or sequential"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "camelCase")]
pub enum RunResult {
    Single { outcome: OutcomeFacts },
    Multi { outcomes: Vec<OutcomeFacts>, values: CrossValues, selected: u32 },
    Relax(RelaxationResult),
    Sequential(MissionSchedule),
}

impl RunResult {
    /// Facts injected by the run, for modes that inject any.
    pub fn outcome_facts(&self) -> Vec<&OutcomeFacts> {
        match self {
            RunResult::Single { outcome } => vec![outcome],
            RunResult::Multi { outcomes, .. } => outcomes.iter().collect(),
            _ => vec![],
        }
    }
}

/// Result plus what is needed to inspect it afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub result: RunResult,
    pub interpretation: Option<Interpretation>,
    pub problems: Vec<ProblemReport>,
}
