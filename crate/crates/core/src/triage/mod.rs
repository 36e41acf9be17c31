//! Casualties, assets and facilities; criticality scoring; travel geometry;
//! and the logic vocabulary that ties them to the inference engine.

mod geo;
mod model;
mod resolve;
mod rules;
mod scoring;

use thiserror::Error;

pub use geo::{haversine_km, TripLegs, EARTH_RADIUS_KM};
pub use model::{Asset, Casualty, Facility, Location, Scenario};
pub use resolve::{lsi_hours, rtd_hours, scr, sup_of, ResolvedScores};
pub use rules::{
    default_score_rules, extend_program, scenario_facts, scenario_functions, scenario_program, vocabulary, C_AIR, C_LSI, C_RTD,
    C_SCR, O_RTD, O_SCR,
};
pub use scoring::{
    clamp_unit, code_gcs, code_rr, code_sbp, life_score, niss_raw, niss_score, rts_raw, rts_score, RawNorm,
    ScoreBundle, ScoreDefaults, EPSILON,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriageError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("casualty {casualty} has no {what} data")]
    MissingData { casualty: String, what: &'static str },
    #[error("no score derivable for casualty {0}")]
    NoScore(String),
}
