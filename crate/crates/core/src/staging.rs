//! Compiles `use_o`/`use_c` facts into concrete 0-1 assignment programs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Constant, GroundAtom, Interpretation};
use crate::triage::{ResolvedScores, Scenario, ScoreDefaults, TripLegs, C_AIR, C_LSI, C_RTD, C_SCR, O_RTD, O_SCR};

/// Integer resolution used for exact objective comparisons.
pub const WEIGHT_SCALE: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StagingError {
    #[error("problem {index} has more than one objective ({first}, {second})")]
    DuplicateObjective { index: u32, first: String, second: String },
    #[error("unknown objective {0}")]
    UnknownObjective(String),
    #[error("unknown constraint {0}")]
    UnknownConstraint(String),
    #[error("constraint {0} needs a threshold")]
    MissingThreshold(String),
    #[error("constraint {0} takes no threshold")]
    UnexpectedThreshold(String),
    #[error("problem index {0} is not a natural number")]
    BadIndex(String),
    #[error("constraints given for problem {0}, which has no objective")]
    OrphanConstraint(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ObjectiveSpec {
    /// Maximize triage score served (`o_scr`).
    Urgency,
    /// Favor casualties who return to duty soonest (`o_rtd`).
    ReverseTriage,
}

impl ObjectiveSpec {
    pub const ALL: [ObjectiveSpec; 2] = [ObjectiveSpec::Urgency, ObjectiveSpec::ReverseTriage];

    pub fn constant(self) -> &'static str {
        match self {
            ObjectiveSpec::Urgency => O_SCR,
            ObjectiveSpec::ReverseTriage => O_RTD,
        }
    }

    pub fn from_constant(name: &str) -> Option<Self> {
        match name {
            O_SCR => Some(ObjectiveSpec::Urgency),
            O_RTD => Some(ObjectiveSpec::ReverseTriage),
            _ => None,
        }
    }

    /// `1 + scr - norm` for urgency, `1 + 1/(1 + rtd) - norm` for reverse triage.
    pub fn weight(self, scr: f64, rtd: f64, total_norm: f64) -> f64 {
        match self {
            ObjectiveSpec::Urgency => 1.0 + scr - total_norm,
            ObjectiveSpec::ReverseTriage => 1.0 + 1.0 / (1.0 + rtd) - total_norm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ConstraintSpec {
    /// Pickup before the life-saving-intervention deadline.
    Lsi,
    /// Nobody left behind scores above `k`.
    ScrThreshold { k: f64 },
    /// Nobody left behind returns to duty in under `k` hours.
    RtdThreshold { k: f64 },
    /// Pickup and delivery legs each at most `k` hours.
    AirTime { k: f64 },
}

impl ConstraintSpec {
    pub fn constant(&self) -> &'static str {
        match self {
            ConstraintSpec::Lsi => C_LSI,
            ConstraintSpec::ScrThreshold { .. } => C_SCR,
            ConstraintSpec::RtdThreshold { .. } => C_RTD,
            ConstraintSpec::AirTime { .. } => C_AIR,
        }
    }

    pub fn threshold(&self) -> Option<f64> {
        match *self {
            ConstraintSpec::Lsi => None,
            ConstraintSpec::ScrThreshold { k } | ConstraintSpec::RtdThreshold { k } | ConstraintSpec::AirTime { k } => {
                Some(k)
            }
        }
    }

    pub fn from_parts(name: &str, k: Option<f64>) -> Result<Self, StagingError> {
        let need = |k: Option<f64>| k.ok_or_else(|| StagingError::MissingThreshold(name.to_string()));
        match name {
            C_LSI if k.is_some() => Err(StagingError::UnexpectedThreshold(name.to_string())),
            C_LSI => Ok(ConstraintSpec::Lsi),
            C_SCR => Ok(ConstraintSpec::ScrThreshold { k: need(k)? }),
            C_RTD => Ok(ConstraintSpec::RtdThreshold { k: need(k)? }),
            C_AIR => Ok(ConstraintSpec::AirTime { k: need(k)? }),
            _ => Err(StagingError::UnknownConstraint(name.to_string())),
        }
    }

    fn sort_key(&self) -> (&'static str, i64) {
        (self.constant(), self.threshold().map_or(0, |k| (k * WEIGHT_SCALE).round() as i64))
    }
}

/// One optimization problem read off the interpretation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StagedProblem {
    pub index: u32,
    pub objective: ObjectiveSpec,
    pub constraints: Vec<ConstraintSpec>,
    pub scores: ResolvedScores,
}

fn index_of(c: &Constant) -> Result<u32, StagingError> {
    match c.as_number() {
        Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX) => Ok(x as u32),
        _ => Err(StagingError::BadIndex(c.to_string())),
    }
}

fn symbol(c: &Constant) -> String {
    c.as_symbol().map_or_else(|| c.to_string(), str::to_string)
}

/// Objectives and constraints per problem index, from true `use_o`/`use_c`
/// atoms. Unary forms carry the implicit index 0.
#[allow(clippy::type_complexity)]
pub fn read_uses(
    interp: &Interpretation,
) -> Result<BTreeMap<u32, (ObjectiveSpec, Vec<ConstraintSpec>)>, StagingError> {
    let mut objectives: BTreeMap<u32, ObjectiveSpec> = BTreeMap::new();
    let mut constraints: BTreeMap<u32, Vec<ConstraintSpec>> = BTreeMap::new();
    let uses = |pred: &'static str| {
        interp.atoms_of(pred).filter(|(_, v)| *v == crate::logic::TruthValue::True).map(|(a, _)| a)
    };
    for atom in uses("use_o") {
        let name = symbol(&atom.args[0]);
        let objective = ObjectiveSpec::from_constant(&name).ok_or(StagingError::UnknownObjective(name))?;
        let index = match atom.args.get(1) {
            Some(i) => index_of(i)?,
            None => 0,
        };
        if let Some(prev) = objectives.insert(index, objective) {
            if prev != objective {
                let (first, second) = if prev < objective { (prev, objective) } else { (objective, prev) };
                return Err(StagingError::DuplicateObjective {
                    index,
                    first: first.constant().into(),
                    second: second.constant().into(),
                });
            }
        }
    }
    for atom in uses("use_c") {
        let (spec, index) = parse_use_c(atom)?;
        constraints.entry(index).or_default().push(spec);
    }
    if let Some(&orphan) = constraints.keys().find(|i| !objectives.contains_key(i)) {
        return Err(StagingError::OrphanConstraint(orphan));
    }
    Ok(objectives
        .into_iter()
        .map(|(i, o)| {
            let mut cs = constraints.remove(&i).unwrap_or_default();
            cs.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            cs.dedup();
            (i, (o, cs))
        })
        .collect())
}

fn parse_use_c(atom: &GroundAtom) -> Result<(ConstraintSpec, u32), StagingError> {
    let name = symbol(&atom.args[0]);
    let number = |c: &Constant| c.as_number().ok_or_else(|| StagingError::BadIndex(c.to_string()));
    match atom.args.as_slice() {
        [_] => Ok((ConstraintSpec::from_parts(&name, None)?, 0)),
        // c_lsi carries an index here; thresholded constraints a threshold.
        [_, x] if name == C_LSI => Ok((ConstraintSpec::Lsi, index_of(x)?)),
        [_, k] => Ok((ConstraintSpec::from_parts(&name, Some(number(k)?))?, 0)),
        [_, k, i] => Ok((ConstraintSpec::from_parts(&name, Some(number(k)?))?, index_of(i)?)),
        _ => Err(StagingError::UnknownConstraint(atom.to_string())),
    }
}

/// One staged problem per index with a true `use_o` atom, in index order.
pub fn stage(
    interp: &Interpretation,
    scenario: &Scenario,
    defaults: &ScoreDefaults,
) -> Result<Vec<StagedProblem>, StagingError> {
    let uses = read_uses(interp)?;
    if uses.is_empty() {
        return Ok(Vec::new());
    }
    let scores = ResolvedScores::resolve(interp, scenario, defaults);
    Ok(uses
        .into_iter()
        .map(|(index, (objective, constraints))| StagedProblem {
            index,
            objective,
            constraints,
            scores: scores.clone(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct StagingConfig {
    /// Casualties one asset may carry per round.
    pub capacity: u32,
    /// Hours already elapsed; life-saving deadlines are measured from zero.
    pub clock_offset_hours: f64,
    pub score_defaults: ScoreDefaults,
}

impl Default for StagingConfig {
    fn default() -> Self {
        StagingConfig { capacity: 1, clock_offset_hours: 0.0, score_defaults: ScoreDefaults::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub casualty: String,
    pub asset: String,
    pub facility: String,
}

impl Triple {
    pub fn new(casualty: impl Into<String>, asset: impl Into<String>, facility: impl Into<String>) -> Self {
        Triple { casualty: casualty.into(), asset: asset.into(), facility: facility.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Variable {
    #[serde(flatten)]
    pub triple: Triple,
    pub pickup_hours: f64,
    pub delivery_hours: f64,
    pub total_hours: f64,
    pub total_norm: f64,
    pub weight: f64,
}

impl Variable {
    pub fn scaled_weight(&self) -> i64 {
        scale(self.weight)
    }
}

pub fn scale(w: f64) -> i64 {
    (w * WEIGHT_SCALE).round() as i64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IlpInstance {
    pub index: u32,
    pub objective: ObjectiveSpec,
    /// Staged casualties, sorted.
    pub casualties: Vec<String>,
    /// Assets, sorted.
    pub assets: Vec<String>,
    /// Lexicographic by (casualty, asset, facility).
    pub variables: Vec<Variable>,
    pub forced: BTreeSet<String>,
    pub capacity: u32,
    pub t_max: f64,
    /// Forced casualties with no surviving variable.
    pub infeasible_forced: Vec<String>,
    pub excluded: Vec<String>,
}

/// Legs of every triple that passes the range and duty filters, and the
/// largest total time among them.
pub fn base_triples(scenario: &Scenario, casualties: &[String]) -> (Vec<(Triple, TripLegs)>, f64) {
    let mut assets: Vec<_> = scenario.assets.iter().collect();
    assets.sort_by(|a, b| a.name.cmp(&b.name));
    let mut facilities: Vec<_> = scenario.facilities.iter().collect();
    facilities.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    let mut t_max: f64 = 0.0;
    for p in casualties {
        let Some(c) = scenario.casualty(p) else { continue };
        for a in &assets {
            for f in &facilities {
                let legs = TripLegs::compute(c, a, f);
                if legs.round_trip_km <= a.range && legs.total_hours <= a.duty_hours {
                    t_max = t_max.max(legs.total_hours);
                    out.push((Triple::new(&c.name, &a.name, &f.name), legs));
                }
            }
        }
    }
    (out, t_max)
}

/// Whether a triple with these legs passes every active filter.
pub fn passes_filters(
    constraints: &[ConstraintSpec],
    legs: &TripLegs,
    lsi: f64,
    clock_offset_hours: f64,
) -> bool {
    constraints.iter().all(|c| match *c {
        ConstraintSpec::Lsi => legs.pickup_hours <= lsi - clock_offset_hours,
        ConstraintSpec::AirTime { k } => legs.pickup_hours <= k && legs.delivery_hours <= k,
        ConstraintSpec::ScrThreshold { .. } | ConstraintSpec::RtdThreshold { .. } => true,
    })
}

/// Casualties a set of threshold constraints requires to be evacuated.
pub fn forced_casualties(constraints: &[ConstraintSpec], scores: &ResolvedScores) -> BTreeSet<String> {
    let mut forced = BTreeSet::new();
    for c in constraints {
        match *c {
            ConstraintSpec::ScrThreshold { k } => {
                forced.extend(scores.scr.iter().filter(|(_, &s)| s > k).map(|(p, _)| p.clone()));
            }
            ConstraintSpec::RtdThreshold { k } => {
                forced.extend(scores.rtd.iter().filter(|(_, &r)| r < k).map(|(p, _)| p.clone()));
            }
            _ => {}
        }
    }
    forced
}

pub fn build_ilp(sp: &StagedProblem, scenario: &Scenario, config: &StagingConfig) -> IlpInstance {
    let mut casualties: Vec<String> = sp.scores.scr.keys().cloned().collect();
    casualties.sort();
    let mut assets: Vec<String> = scenario.assets.iter().map(|a| a.name.clone()).collect();
    assets.sort();
    let (base, t_max) = base_triples(scenario, &casualties);
    let variables: Vec<Variable> = base
        .into_iter()
        .filter(|(t, legs)| passes_filters(&sp.constraints, legs, sp.scores.lsi[&t.casualty], config.clock_offset_hours))
        .map(|(triple, legs)| {
            let total_norm = legs.normalized(t_max);
            let weight = sp.objective.weight(sp.scores.scr[&triple.casualty], sp.scores.rtd[&triple.casualty], total_norm);
            Variable {
                triple,
                pickup_hours: legs.pickup_hours,
                delivery_hours: legs.delivery_hours,
                total_hours: legs.total_hours,
                total_norm,
                weight,
            }
        })
        .collect();
    let forced = forced_casualties(&sp.constraints, &sp.scores);
    let covered: BTreeSet<&str> = variables.iter().map(|v| v.triple.casualty.as_str()).collect();
    let infeasible_forced = forced.iter().filter(|p| !covered.contains(p.as_str())).cloned().collect();
    IlpInstance {
        index: sp.index,
        objective: sp.objective,
        casualties,
        assets,
        variables,
        forced,
        capacity: config.capacity,
        t_max,
        infeasible_forced,
        excluded: sp.scores.excluded.clone(),
    }
}

/// Context for scoring arbitrary assignments under either objective.
#[derive(Clone, Debug)]
pub struct EvaluationContext<'a> {
    pub scenario: &'a Scenario,
    pub scores: &'a ResolvedScores,
    pub t_max: f64,
}

impl EvaluationContext<'_> {
    /// Weight of a triple under `objective`, computed exactly as `build_ilp` does.
    pub fn weight(&self, triple: &Triple, objective: ObjectiveSpec) -> Option<f64> {
        let c = self.scenario.casualty(&triple.casualty)?;
        let a = self.scenario.asset(&triple.asset)?;
        let f = self.scenario.facility(&triple.facility)?;
        let legs = TripLegs::compute(c, a, f);
        let scr = *self.scores.scr.get(&triple.casualty)?;
        let rtd = *self.scores.rtd.get(&triple.casualty)?;
        Some(objective.weight(scr, rtd, legs.normalized(self.t_max)))
    }

    /// Sum of objective weights over the assignment.
    pub fn evaluate_under(&self, chosen: &[Triple], objective: ObjectiveSpec) -> f64 {
        chosen.iter().filter_map(|t| self.weight(t, objective)).fold(0.0, |a, w| a + w)
    }

    /// Same sum on the integer grid the solver optimizes over.
    pub fn evaluate_scaled(&self, chosen: &[Triple], objective: ObjectiveSpec) -> i64 {
        chosen.iter().filter_map(|t| self.weight(t, objective)).map(scale).sum()
    }
}
