//! Greedy allocators used as comparison points. Each walks casualties in
//! some order and gives each one a uniformly random feasible (asset,
//! facility) pair among assets with spare capacity.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::solver::{Solution, Status};
use crate::staging::{IlpInstance, Triple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    /// Random casualty order.
    B1,
    /// Descending triage score.
    B2,
    /// Ascending return-to-duty time.
    B3,
}

/// Casualties from `keys` by ascending key, ties by name.
fn ordered(keys: &BTreeMap<String, f64>, casualties: &[String], descending: bool) -> Vec<String> {
    let mut v: Vec<(f64, &String)> = casualties.iter().map(|p| (keys.get(p).copied().unwrap_or(f64::NAN), p)).collect();
    v.sort_by(|a, b| {
        let by_key = if descending { b.0.total_cmp(&a.0) } else { a.0.total_cmp(&b.0) };
        by_key.then_with(|| a.1.cmp(b.1))
    });
    v.into_iter().map(|(_, p)| p.clone()).collect()
}

/// Serves casualties in `order`, picking among `ilp`'s variables.
pub fn greedy(ilp: &IlpInstance, order: &[String], rng: &mut impl Rng) -> Solution {
    let mut load: BTreeMap<&str, u32> = BTreeMap::new();
    let mut chosen = Vec::new();
    for p in order {
        let options: Vec<_> = ilp
            .variables
            .iter()
            .filter(|v| &v.triple.casualty == p && load.get(v.triple.asset.as_str()).copied().unwrap_or(0) < ilp.capacity)
            .collect();
        if options.is_empty() {
            continue;
        }
        let v = options[rng.random_range(0..options.len())];
        *load.entry(v.triple.asset.as_str()).or_default() += 1;
        chosen.push(v);
    }
    let mut triples: Vec<Triple> = chosen.iter().map(|v| v.triple.clone()).collect();
    triples.sort();
    Solution {
        objective_value: chosen.iter().map(|v| v.weight).fold(0.0, |a, w| a + w),
        scaled_value: chosen.iter().map(|v| v.scaled_weight()).sum(),
        chosen: triples,
        status: Status::Feasible,
        node_count: 0,
    }
}

pub fn b1_random(ilp: &IlpInstance, seed: u64) -> Solution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = ilp.casualties.clone();
    order.shuffle(&mut rng);
    greedy(ilp, &order, &mut rng)
}

pub fn b2_triage_priority(ilp: &IlpInstance, scr: &BTreeMap<String, f64>, seed: u64) -> Solution {
    greedy(ilp, &ordered(scr, &ilp.casualties, true), &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn b3_rtd_priority(ilp: &IlpInstance, rtd: &BTreeMap<String, f64>, seed: u64) -> Solution {
    greedy(ilp, &ordered(rtd, &ilp.casualties, false), &mut ChaCha8Rng::seed_from_u64(seed))
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::B1, Baseline::B2, Baseline::B3];

    pub fn run(self, ilp: &IlpInstance, scr: &BTreeMap<String, f64>, rtd: &BTreeMap<String, f64>, seed: u64) -> Solution {
        match self {
            Baseline::B1 => b1_random(ilp, seed),
            Baseline::B2 => b2_triage_priority(ilp, scr, seed),
            Baseline::B3 => b3_rtd_priority(ilp, rtd, seed),
        }
    }
}
