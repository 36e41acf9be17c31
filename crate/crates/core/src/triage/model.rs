use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::TriageError;

/// Latitude/longitude in decimal degrees, serialized as `[lat, lon]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Location {
    pub lat: f64,
    pub lon: f64,
}

impl Location {
    pub fn new(lat: f64, lon: f64) -> Self {
        Location { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat) && (-180.0..=180.0).contains(&self.lon)
    }
}

impl From<[f64; 2]> for Location {
    fn from([lat, lon]: [f64; 2]) -> Self {
        Location { lat, lon }
    }
}

impl From<Location> for [f64; 2] {
    fn from(l: Location) -> Self {
        [l.lat, l.lon]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Casualty {
    pub name: String,
    /// Per-insult AIS severities, each in 0..=6.
    pub ais: Vec<u8>,
    /// Systolic blood pressure, mmHg.
    pub sbp: Option<u32>,
    /// Respiratory rate, breaths/min.
    pub rr: Option<u32>,
    /// Glasgow Coma Scale, 3..=15.
    pub gcs: Option<u8>,
    pub location: Location,
    pub insults_available: bool,
    pub vitals_available: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Asset {
    pub name: String,
    pub location: Location,
    /// Maximum sortie distance, km.
    pub range: f64,
    /// Cruise speed, km/h.
    pub speed: f64,
    /// Remaining crew duty hours.
    pub duty_hours: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Facility {
    pub name: String,
    pub location: Location,
    /// Reserved; facilities are treated as uncapacitated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub casualties: Vec<Casualty>,
    pub assets: Vec<Asset>,
    pub facilities: Vec<Facility>,
    pub seed: u64,
}

impl Scenario {
    pub fn casualty(&self, name: &str) -> Option<&Casualty> {
        self.casualties.iter().find(|c| c.name == name)
    }

    pub fn asset(&self, name: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.name == name)
    }

    pub fn facility(&self, name: &str) -> Option<&Facility> {
        self.facilities.iter().find(|f| f.name == name)
    }

    /// Checks the data-model invariants.
    pub fn validate(&self) -> Result<(), TriageError> {
        let invalid = |msg: String| Err(TriageError::InvalidScenario(msg));
        for (class, names) in [
            ("casualty", self.casualties.iter().map(|c| c.name.as_str()).collect::<Vec<_>>()),
            ("asset", self.assets.iter().map(|a| a.name.as_str()).collect()),
            ("facility", self.facilities.iter().map(|f| f.name.as_str()).collect()),
        ] {
            let mut seen = BTreeSet::new();
            for n in names {
                if n.is_empty() {
                    return invalid(format!("empty {class} name"));
                }
                if !seen.insert(n) {
                    return invalid(format!("duplicate {class} name {n}"));
                }
            }
        }
        for c in &self.casualties {
            if !c.location.is_valid() {
                return invalid(format!("casualty {} has invalid coordinates", c.name));
            }
            if let Some(&bad) = c.ais.iter().find(|&&a| a > 6) {
                return invalid(format!("casualty {} has AIS {bad} outside 0..=6", c.name));
            }
            if c.insults_available && c.ais.is_empty() {
                return invalid(format!("casualty {} flags insults available but lists none", c.name));
            }
            if c.vitals_available && (c.sbp.is_none() || c.rr.is_none() || c.gcs.is_none()) {
                return invalid(format!("casualty {} flags vitals available but some are missing", c.name));
            }
            if let Some(g) = c.gcs {
                if !(3..=15).contains(&g) {
                    return invalid(format!("casualty {} has GCS {g} outside 3..=15", c.name));
                }
            }
        }
        for a in &self.assets {
            if !a.location.is_valid() {
                return invalid(format!("asset {} has invalid coordinates", a.name));
            }
            if !(a.speed > 0.0 && a.speed.is_finite()) {
                return invalid(format!("asset {} must have positive speed", a.name));
            }
            if !(a.range >= 0.0 && a.duty_hours >= 0.0) {
                return invalid(format!("asset {} has negative range or duty hours", a.name));
            }
        }
        for f in &self.facilities {
            if !f.location.is_valid() {
                return invalid(format!("facility {} has invalid coordinates", f.name));
            }
        }
        Ok(())
    }
}
