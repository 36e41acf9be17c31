use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::logic::{Constant, Interpretation};

use super::model::Scenario;
use super::scoring::ScoreDefaults;
use super::TriageError;

/// Supremum of `x` over true atoms `pred(p, x)`.
pub fn sup_of(interp: &Interpretation, predicate: &str, p: &str) -> Option<f64> {
    interp
        .true_atoms(predicate, 2)
        .filter(|a| a.args[0] == Constant::sym(p))
        .filter_map(|a| a.args[1].as_number())
        .reduce(f64::max)
}

/// The triage score of `p`: the largest true `score(p, x)`.
pub fn scr(interp: &Interpretation, p: &str) -> Result<f64, TriageError> {
    sup_of(interp, "score", p).ok_or_else(|| TriageError::NoScore(p.to_string()))
}

pub fn rtd_hours(interp: &Interpretation, p: &str, scr: f64, defaults: &ScoreDefaults) -> f64 {
    sup_of(interp, "rtdScore", p).unwrap_or_else(|| defaults.rtd_hours(scr))
}

pub fn lsi_hours(interp: &Interpretation, p: &str, scr: f64, defaults: &ScoreDefaults) -> f64 {
    sup_of(interp, "lsiScore", p).unwrap_or_else(|| defaults.lsi_hours(scr))
}

/// Per-casualty scr/rtd/lsi. Casualties without a derivable score are
/// listed in `excluded` rather than given a default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedScores {
    pub scr: BTreeMap<String, f64>,
    pub rtd: BTreeMap<String, f64>,
    pub lsi: BTreeMap<String, f64>,
    pub excluded: Vec<String>,
}

impl ResolvedScores {
    pub fn resolve(interp: &Interpretation, scenario: &Scenario, defaults: &ScoreDefaults) -> Self {
        let mut out = ResolvedScores::default();
        for c in &scenario.casualties {
            match scr(interp, &c.name) {
                Ok(s) => {
                    out.rtd.insert(c.name.clone(), rtd_hours(interp, &c.name, s, defaults));
                    out.lsi.insert(c.name.clone(), lsi_hours(interp, &c.name, s, defaults));
                    out.scr.insert(c.name.clone(), s);
                }
                Err(_) => out.excluded.push(c.name.clone()),
            }
        }
        out
    }
}
