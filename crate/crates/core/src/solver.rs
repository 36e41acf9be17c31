//! Exact solver for the staged assignment programs, and a brute-force
//! oracle for small instances.
//!
//! Each casualty takes at most one (asset, facility) pair, each asset at most
//! `capacity` casualties, and forced casualties must be served. Facilities
//! are uncapacitated, so for a fixed (casualty, asset) pair only the best
//! facility matters and the rest is a bipartite matching problem. The search
//! walks casualties in name order, trying assets in name order before
//! skipping, and prunes with the optimal value of the remaining matching
//! problem. Because that bound is exact the first complete leaf is optimal,
//! and it is the lexicographically smallest optimal set.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::staging::{IlpInstance, Triple};

pub const NODE_LIMIT: u64 = 10_000_000;
pub const BRUTE_FORCE_MAX_CASUALTIES: usize = 8;
pub const BRUTE_FORCE_MAX_ASSETS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("search exceeded {0} nodes")]
    NodeLimit(u64),
    #[error("instance too large for brute force ({casualties} casualties, {assets} assets)")]
    TooLarge { casualties: usize, assets: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Optimal,
    /// Satisfies every constraint but was not proven optimal (heuristics).
    Feasible,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Solution {
    /// Sorted.
    pub chosen: Vec<Triple>,
    pub objective_value: f64,
    /// Objective on the 1e-9 integer grid.
    pub scaled_value: i64,
    pub status: Status,
    pub node_count: u64,
}

impl Solution {
    pub fn infeasible(node_count: u64) -> Self {
        Solution { chosen: vec![], objective_value: 0.0, scaled_value: 0, status: Status::Infeasible, node_count }
    }

    fn from_indices(ilp: &IlpInstance, mut picks: Vec<usize>, node_count: u64) -> Self {
        picks.sort_by(|&a, &b| ilp.variables[a].triple.cmp(&ilp.variables[b].triple));
        Solution {
            chosen: picks.iter().map(|&i| ilp.variables[i].triple.clone()).collect(),
            objective_value: picks.iter().map(|&i| ilp.variables[i].weight).fold(0.0, |a, w| a + w),
            scaled_value: picks.iter().map(|&i| ilp.variables[i].scaled_weight()).sum(),
            status: Status::Optimal,
            node_count,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Checks a solution against the instance: known triples, one triple per
/// casualty, asset capacity, forced coverage and the recomputed objective.
pub fn check_solution(ilp: &IlpInstance, sol: &Solution) -> Result<(), String> {
    if sol.status == Status::Infeasible {
        return if sol.chosen.is_empty() { Ok(()) } else { Err("infeasible solution lists triples".into()) };
    }
    let by_triple: BTreeMap<&Triple, i64> = ilp.variables.iter().map(|v| (&v.triple, v.scaled_weight())).collect();
    let mut seen = BTreeSet::new();
    let mut load: BTreeMap<&str, u32> = BTreeMap::new();
    let mut total = 0;
    for t in &sol.chosen {
        let w = by_triple.get(t).ok_or_else(|| format!("{t:?} is not a variable"))?;
        total += w;
        if !seen.insert(t.casualty.as_str()) {
            return Err(format!("casualty {} assigned twice", t.casualty));
        }
        let n = load.entry(t.asset.as_str()).or_default();
        *n += 1;
        if *n > ilp.capacity {
            return Err(format!("asset {} over capacity", t.asset));
        }
    }
    if let Some(p) = ilp.forced.iter().find(|p| !seen.contains(p.as_str())) {
        return Err(format!("forced casualty {p} not served"));
    }
    if total != sol.scaled_value {
        return Err(format!("objective {} does not match recomputed {}", sol.scaled_value, total));
    }
    Ok(())
}

const INF: i64 = 1 << 52;

/// Minimum-cost assignment of every row to a distinct column, rows ≤ columns.
/// Returns the total cost; forbidden cells carry `INF`.
fn hungarian(cost: &[Vec<i64>]) -> i64 {
    let n = cost.len();
    if n == 0 {
        return 0;
    }
    let m = cost[0].len();
    debug_assert!(m >= n);
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m).filter(|&j| p[j] != 0).map(|j| cost[p[j] - 1][j - 1]).sum()
}

struct Search<'a> {
    /// Casualties with at least one variable, sorted.
    casualties: Vec<&'a str>,
    forced: Vec<bool>,
    /// best[c][a]: index of the best variable for casualty c on asset a.
    best: Vec<Vec<Option<usize>>>,
    weights: Vec<i64>,
    nodes: u64,
    target: i64,
    picks: Vec<usize>,
}

impl Search<'_> {
    fn weight(&self, c: usize, a: usize) -> Option<i64> {
        self.best[c][a].map(|i| self.weights[i])
    }

    /// Best value over casualties `from..` given remaining capacities, or
    /// `None` when some forced casualty cannot be served.
    fn exact_bound(&self, from: usize, cap: &[u32]) -> Option<i64> {
        let rows: Vec<usize> = (from..self.casualties.len()).collect();
        let slots: Vec<usize> = cap.iter().enumerate().flat_map(|(a, &k)| std::iter::repeat_n(a, k as usize)).collect();
        let cost: Vec<Vec<i64>> = rows
            .iter()
            .map(|&c| {
                let mut row: Vec<i64> = slots.iter().map(|&a| self.weight(c, a).map_or(INF, |w| -w)).collect();
                let skip = if self.forced[c] { INF } else { 0 };
                row.extend(std::iter::repeat_n(skip, rows.len()));
                row
            })
            .collect();
        let total = hungarian(&cost);
        (total < INF / 2).then_some(-total)
    }

    /// Cheap relaxation: each remaining casualty takes its best open asset,
    /// and each asset its `cap` best casualties; the smaller sum bounds both.
    fn greedy_bound(&self, from: usize, cap: &[u32]) -> i64 {
        let per_casualty: i64 = (from..self.casualties.len())
            .map(|c| (0..cap.len()).filter(|&a| cap[a] > 0).filter_map(|a| self.weight(c, a)).max().unwrap_or(0))
            .sum();
        let per_asset: i64 = (0..cap.len())
            .map(|a| {
                let mut ws: Vec<i64> = (from..self.casualties.len()).filter_map(|c| self.weight(c, a)).collect();
                ws.sort_unstable_by(|x, y| y.cmp(x));
                ws.iter().take(cap[a] as usize).sum::<i64>()
            })
            .sum();
        per_casualty.min(per_asset)
    }

    fn dfs(&mut self, c: usize, cap: &mut [u32], value: i64) -> Result<bool, SolverError> {
        if c == self.casualties.len() {
            return Ok(value == self.target);
        }
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            return Err(SolverError::NodeLimit(NODE_LIMIT));
        }
        if value + self.greedy_bound(c, cap) < self.target {
            return Ok(false);
        }
        match self.exact_bound(c, cap) {
            Some(b) if value + b >= self.target => {}
            _ => return Ok(false),
        }
        for a in 0..cap.len() {
            let Some(i) = self.best[c][a] else { continue };
            if cap[a] == 0 {
                continue;
            }
            cap[a] -= 1;
            self.picks.push(i);
            let found = self.dfs(c + 1, cap, value + self.weights[i])?;
            cap[a] += 1;
            if found {
                return Ok(true);
            }
            self.picks.pop();
        }
        if !self.forced[c] {
            return self.dfs(c + 1, cap, value);
        }
        Ok(false)
    }
}

/// Maximum-weight feasible selection; among equal optima the
/// lexicographically smallest sorted triple list.
pub fn solve(ilp: &IlpInstance) -> Result<Solution, SolverError> {
    if !ilp.infeasible_forced.is_empty() {
        return Ok(Solution::infeasible(0));
    }
    let assets: BTreeMap<&str, usize> = ilp.assets.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let weights: Vec<i64> = ilp.variables.iter().map(|v| v.scaled_weight()).collect();
    let mut rows: BTreeMap<&str, Vec<Option<usize>>> = BTreeMap::new();
    for (i, v) in ilp.variables.iter().enumerate() {
        let a = assets[v.triple.asset.as_str()];
        let row = rows.entry(v.triple.casualty.as_str()).or_insert_with(|| vec![None; assets.len()]);
        // Variables are sorted, so the first maximum is the smallest facility.
        if row[a].is_none_or(|j| weights[i] > weights[j]) {
            row[a] = Some(i);
        }
    }
    if ilp.forced.iter().any(|p| !rows.contains_key(p.as_str())) {
        return Ok(Solution::infeasible(0));
    }
    let casualties: Vec<&str> = rows.keys().copied().collect();
    let mut search = Search {
        forced: casualties.iter().map(|p| ilp.forced.contains(*p)).collect(),
        best: rows.into_values().collect(),
        casualties,
        weights,
        nodes: 1,
        target: 0,
        picks: Vec::new(),
    };
    let mut cap = vec![ilp.capacity; assets.len()];
    let Some(target) = search.exact_bound(0, &cap) else {
        return Ok(Solution::infeasible(search.nodes));
    };
    search.target = target;
    if !search.dfs(0, &mut cap, 0)? {
        unreachable!("exact bound promised a leaf with value {target}");
    }
    Ok(Solution::from_indices(ilp, search.picks, search.nodes))
}

/// Exhaustive enumeration over every feasible selection, for testing.
pub fn brute_force(ilp: &IlpInstance) -> Result<Solution, SolverError> {
    let casualties: Vec<&str> = ilp.casualties.iter().map(String::as_str).collect();
    if casualties.len() > BRUTE_FORCE_MAX_CASUALTIES || ilp.assets.len() > BRUTE_FORCE_MAX_ASSETS {
        return Err(SolverError::TooLarge { casualties: casualties.len(), assets: ilp.assets.len() });
    }
    let options: Vec<Vec<usize>> = casualties
        .iter()
        .map(|p| (0..ilp.variables.len()).filter(|&i| ilp.variables[i].triple.casualty == *p).collect())
        .collect();
    struct Enum<'a> {
        ilp: &'a IlpInstance,
        casualties: Vec<&'a str>,
        options: Vec<Vec<usize>>,
        load: BTreeMap<&'a str, u32>,
        current: Vec<usize>,
        best: Option<(i64, Vec<Triple>, Vec<usize>)>,
        nodes: u64,
    }
    impl<'a> Enum<'a> {
        fn go(&mut self, c: usize) {
            self.nodes += 1;
            if c == self.casualties.len() {
                let value: i64 = self.current.iter().map(|&i| self.ilp.variables[i].scaled_weight()).sum();
                let mut triples: Vec<Triple> = self.current.iter().map(|&i| self.ilp.variables[i].triple.clone()).collect();
                triples.sort();
                let better = match &self.best {
                    None => true,
                    Some((bv, bt, _)) => value > *bv || (value == *bv && triples < *bt),
                };
                if better {
                    self.best = Some((value, triples, self.current.clone()));
                }
                return;
            }
            if !self.ilp.forced.contains(self.casualties[c]) {
                self.go(c + 1);
            }
            for k in 0..self.options[c].len() {
                let i = self.options[c][k];
                let asset = self.ilp.variables[i].triple.asset.as_str();
                let used = self.load.get(asset).copied().unwrap_or(0);
                if used >= self.ilp.capacity {
                    continue;
                }
                self.load.insert(asset, used + 1);
                self.current.push(i);
                self.go(c + 1);
                self.current.pop();
                self.load.insert(asset, used);
            }
        }
    }
    let mut e = Enum { ilp, casualties, options, load: BTreeMap::new(), current: vec![], best: None, nodes: 0 };
    e.go(0);
    Ok(match e.best {
        Some((_, _, picks)) => Solution::from_indices(ilp, picks, e.nodes),
        None => Solution::infeasible(e.nodes),
    })
}

/// Random small instance for oracle checks: up to 6 casualties, 3 assets
/// and 3 facilities, about half the triples present, some forced
/// casualties, and weights drawn from a coarse grid half the time so that
/// ties occur.
pub fn random_instance(seed: u64) -> IlpInstance {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = if rng.random_bool(0.05) { 0 } else { rng.random_range(1..=6) };
    let m = if rng.random_bool(0.05) { 0 } else { rng.random_range(1..=3) };
    let k = rng.random_range(1..=3);
    let casualties: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    let assets: Vec<String> = (1..=m).map(|i| format!("a{i}")).collect();
    let coarse = rng.random_bool(0.5);
    let density = rng.random_range(0.3..0.9);
    let mut variables = Vec::new();
    for p in &casualties {
        for a in &assets {
            for f in 1..=k {
                if rng.random_bool(density) {
                    let weight = if coarse {
                        f64::from(rng.random_range(1..=8u32)) / 4.0
                    } else {
                        rng.random_range(0.001..2.0)
                    };
                    variables.push(crate::staging::Variable {
                        triple: Triple::new(p, a, format!("f{f}")),
                        pickup_hours: 0.0,
                        delivery_hours: 0.0,
                        total_hours: 0.0,
                        total_norm: 0.0,
                        weight,
                    });
                }
            }
        }
    }
    let forced: BTreeSet<String> = casualties.iter().filter(|_| rng.random_bool(0.25)).cloned().collect();
    let covered: BTreeSet<&str> = variables.iter().map(|v| v.triple.casualty.as_str()).collect();
    let infeasible_forced = forced.iter().filter(|p| !covered.contains(p.as_str())).cloned().collect();
    IlpInstance {
        index: 1,
        objective: crate::staging::ObjectiveSpec::Urgency,
        casualties,
        assets,
        variables,
        forced,
        capacity: if rng.random_bool(0.8) { 1 } else { 2 },
        t_max: 1.0,
        infeasible_forced,
        excluded: vec![],
    }
}
