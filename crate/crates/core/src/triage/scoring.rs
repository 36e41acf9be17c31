use serde::{Deserialize, Serialize};

use super::model::Casualty;
use super::TriageError;

/// Normalized scores are clamped into `[EPSILON, 1 - EPSILON]`.
pub const EPSILON: f64 = 1e-3;

pub const NISS_MAX: u32 = 75;
pub const RTS_MAX: u32 = 12;

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(EPSILON, 1.0 - EPSILON)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawNorm {
    pub raw: u32,
    pub norm: f64,
}

/// Sum of squares of the three most severe AIS values, capped at 75; any
/// AIS 6 is unsurvivable and scores 75 outright.
pub fn niss_raw(ais: &[u8]) -> u32 {
    if ais.contains(&6) {
        return NISS_MAX;
    }
    let mut sorted = ais.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let sum: u32 = sorted.iter().take(3).map(|&a| u32::from(a) * u32::from(a)).sum();
    sum.min(NISS_MAX)
}

pub fn niss_score(c: &Casualty) -> Result<RawNorm, TriageError> {
    if !c.insults_available || c.ais.is_empty() {
        return Err(TriageError::MissingData { casualty: c.name.clone(), what: "insults" });
    }
    let raw = niss_raw(&c.ais);
    Ok(RawNorm { raw, norm: clamp_unit(f64::from(raw) / f64::from(NISS_MAX)) })
}

pub fn code_gcs(gcs: u8) -> u32 {
    match gcs {
        13.. => 4,
        9..=12 => 3,
        6..=8 => 2,
        4..=5 => 1,
        _ => 0,
    }
}

pub fn code_sbp(sbp: u32) -> u32 {
    match sbp {
        90.. => 4,
        76..=89 => 3,
        50..=75 => 2,
        1..=49 => 1,
        0 => 0,
    }
}

pub fn code_rr(rr: u32) -> u32 {
    match rr {
        30.. => 3,
        10..=29 => 4,
        6..=9 => 2,
        1..=5 => 1,
        0 => 0,
    }
}

pub fn rts_raw(gcs: u8, sbp: u32, rr: u32) -> u32 {
    code_gcs(gcs) + code_sbp(sbp) + code_rr(rr)
}

pub fn rts_score(c: &Casualty) -> Result<RawNorm, TriageError> {
    let missing = || TriageError::MissingData { casualty: c.name.clone(), what: "vitals" };
    if !c.vitals_available {
        return Err(missing());
    }
    let (Some(gcs), Some(sbp), Some(rr)) = (c.gcs, c.sbp, c.rr) else {
        return Err(missing());
    };
    let raw = rts_raw(gcs, sbp, rr);
    Ok(RawNorm { raw, norm: clamp_unit(1.0 - f64::from(raw) / f64::from(RTS_MAX)) })
}

pub fn life_score(c: &Casualty) -> Result<f64, TriageError> {
    let niss = niss_score(c)?;
    let rts = rts_score(c)?;
    Ok((niss.norm + rts.norm) / 2.0)
}

/// Everything the scoring functions can say about one casualty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreBundle {
    pub niss: Option<RawNorm>,
    pub rts: Option<RawNorm>,
    pub life: Option<f64>,
}

impl ScoreBundle {
    pub fn of(c: &Casualty) -> Self {
        ScoreBundle { niss: niss_score(c).ok(), rts: rts_score(c).ok(), life: life_score(c).ok() }
    }
}

/// Default return-to-duty and life-saving-intervention formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ScoreDefaults {
    /// rtd = rtd_scale * scr hours.
    pub rtd_scale: f64,
    /// lsi = max(lsi_floor, lsi_scale * (1 - scr)) hours.
    pub lsi_scale: f64,
    pub lsi_floor: f64,
}

impl Default for ScoreDefaults {
    fn default() -> Self {
        ScoreDefaults { rtd_scale: 100.0, lsi_scale: 6.0, lsi_floor: 0.25 }
    }
}

impl ScoreDefaults {
    pub fn rtd_hours(&self, scr: f64) -> f64 {
        self.rtd_scale * scr
    }

    pub fn lsi_hours(&self, scr: f64) -> f64 {
        (self.lsi_scale * (1.0 - scr)).max(self.lsi_floor)
    }
}
