//! Seeded scenario generator and scenario files.

use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::triage::{Asset, Casualty, Facility, Location, Scenario, TriageError};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Invalid(#[from] TriageError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    /// Southern Arizona border to northern Utah border, western Arizona
    /// border to eastern Colorado border (approximate).
    pub const SOUTHWEST: BoundingBox = BoundingBox { lat_min: 31.33, lat_max: 42.00, lon_min: -114.82, lon_max: -102.04 };

    pub fn contains(&self, l: Location) -> bool {
        (self.lat_min..=self.lat_max).contains(&l.lat) && (self.lon_min..=self.lon_max).contains(&l.lon)
    }

    fn sample(&self, rng: &mut impl Rng) -> Location {
        Location::new(rng.random_range(self.lat_min..=self.lat_max), rng.random_range(self.lon_min..=self.lon_max))
    }
}

impl Default for BoundingBox {
    fn default() -> Self {
        Self::SOUTHWEST
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub bounding_box: BoundingBox,
    pub vitals_missing_prob: f64,
    pub insults_missing_prob: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 25,
            m: 10,
            k: 5,
            seed: 0,
            bounding_box: BoundingBox::default(),
            vitals_missing_prob: 0.1,
            insults_missing_prob: 0.1,
        }
    }
}

impl GenConfig {
    pub fn new(n: usize, m: usize, k: usize, seed: u64) -> Self {
        GenConfig { n, m, k, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::InvalidConfig(msg));
        for (name, p) in [("vitalsMissingProb", self.vitals_missing_prob), ("insultsMissingProb", self.insults_missing_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        let b = &self.bounding_box;
        if !(b.lat_min < b.lat_max && b.lon_min < b.lon_max) {
            return bad("bounding box is degenerate".into());
        }
        if !(Location::new(b.lat_min, b.lon_min).is_valid() && Location::new(b.lat_max, b.lon_max).is_valid()) {
            return bad("bounding box corners are not valid coordinates".into());
        }
        Ok(())
    }
}

/// Triage categories (minimal, delayed, immediate): share of casualties,
/// insult count range and relative frequency of AIS 0..=5. Overall the
/// insults stay weighted toward low severity.
const CATEGORIES: [(u32, (usize, usize), [u32; 6]); 3] = [
    (50, (1, 3), [30, 50, 20, 0, 0, 0]),
    (30, (1, 4), [0, 15, 35, 35, 15, 0]),
    (20, (2, 4), [0, 0, 0, 20, 40, 40]),
];

fn padded(prefix: char, i: usize, count: usize) -> String {
    let width = count.to_string().len().max(2);
    format!("{prefix}{:0width$}", i + 1)
}

fn casualty(rng: &mut ChaCha8Rng, name: String, cfg: &GenConfig) -> Casualty {
    let category = WeightedIndex::new(CATEGORIES.map(|c| c.0)).expect("static weights").sample(rng);
    let (_, (lo, hi), weights) = CATEGORIES[category];
    let ais_dist = WeightedIndex::new(weights).expect("static weights");
    let count = rng.random_range(lo..=hi);
    let ais: Vec<u8> = (0..count).map(|_| ais_dist.sample(rng) as u8).collect();
    // Vitals deteriorate with the injury burden: blood pressure, breathing
    // and GCS all drift down as the top three insults worsen.
    let mut sorted = ais.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let burden: u32 = sorted.iter().take(3).map(|&a| u32::from(a) * u32::from(a)).sum();
    let severity = (f64::from(burden) / 75.0).min(1.0);
    let normal = |mean: f64, sd: f64| Normal::new(mean, sd).expect("positive deviation");
    let sbp = normal(125.0 - 95.0 * severity, 18.0).sample(rng).round().clamp(0.0, 180.0) as u32;
    let rr = normal(16.0 - 9.0 * severity, 4.0).sample(rng).round().clamp(0.0, 40.0) as u32;
    let gcs = (15.0 - normal(11.0 * severity, 2.0).sample(rng).max(0.0)).round().clamp(3.0, 15.0) as u8;
    let location = cfg.bounding_box.sample(rng);
    let insults_available = !rng.random_bool(cfg.insults_missing_prob);
    let vitals_available = !rng.random_bool(cfg.vitals_missing_prob);
    Casualty {
        name,
        ais: if insults_available { ais } else { Vec::new() },
        sbp: vitals_available.then_some(sbp),
        rr: vitals_available.then_some(rr),
        gcs: vitals_available.then_some(gcs),
        location,
        insults_available,
        vitals_available,
    }
}

/// Deterministic in `cfg`. Casualties are drawn first, then facilities,
/// then assets, all from one stream.
pub fn generate(cfg: &GenConfig) -> Result<Scenario, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let casualties = (0..cfg.n).map(|i| casualty(&mut rng, padded('p', i, cfg.n), cfg)).collect();
    let facilities = (0..cfg.m)
        .map(|i| Facility { name: padded('f', i, cfg.m), location: cfg.bounding_box.sample(&mut rng), capacity: None })
        .collect();
    let assets = (0..cfg.k)
        .map(|i| Asset {
            name: padded('a', i, cfg.k),
            location: cfg.bounding_box.sample(&mut rng),
            speed: rng.random_range(150.0..=300.0),
            range: rng.random_range(300.0..=800.0),
            duty_hours: rng.random_range(4.0..=12.0),
        })
        .collect();
    let scenario = Scenario { casualties, assets, facilities, seed: cfg.seed };
    scenario.validate()?;
    Ok(scenario)
}

pub fn save(scenario: &Scenario, path: &Path) -> Result<(), GenError> {
    let json = serde_json::to_string_pretty(scenario).expect("scenarios serialize");
    fs::write(path, json + "\n").map_err(|source| GenError::Io { path: path.display().to_string(), source })
}

/// Reads and validates a scenario file. Parse errors carry line, column and
/// the offending key.
pub fn load(path: &Path) -> Result<Scenario, GenError> {
    let text = fs::read_to_string(path).map_err(|source| GenError::Io { path: path.display().to_string(), source })?;
    let scenario: Scenario =
        serde_json::from_str(&text).map_err(|source| GenError::Parse { path: path.display().to_string(), source })?;
    scenario.validate()?;
    Ok(scenario)
}
