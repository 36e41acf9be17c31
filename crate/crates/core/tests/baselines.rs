use std::collections::{BTreeMap, BTreeSet};

use medevac_core::baselines::{b1_random, b2_triage_priority, b3_rtd_priority, Baseline};
use medevac_core::scenario_gen::{generate, GenConfig};
use medevac_core::solver::{check_solution, random_instance, solve, Status};
use medevac_core::staging::{IlpInstance, ObjectiveSpec, StagingConfig, Triple, Variable};
use medevac_core::strategy::{RunMode, Strategy};
use proptest::prelude::*;

fn instance(triples: &[(&str, &str, &str)], casualties: &[&str], assets: &[&str]) -> IlpInstance {
    IlpInstance {
        index: 0,
        objective: ObjectiveSpec::Urgency,
        casualties: casualties.iter().map(|s| s.to_string()).collect(),
        assets: assets.iter().map(|s| s.to_string()).collect(),
        variables: triples
            .iter()
            .map(|&(p, a, f)| Variable {
                triple: Triple::new(p, a, f),
                pickup_hours: 0.5,
                delivery_hours: 0.5,
                total_hours: 1.0,
                total_norm: 0.5,
                weight: 1.0,
            })
            .collect(),
        forced: BTreeSet::new(),
        capacity: 1,
        t_max: 2.0,
        infeasible_forced: vec![],
        excluded: vec![],
    }
}

fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

#[test]
fn no_feasible_pairs_gives_empty_solution() {
    let ilp = instance(&[], &["p1", "p2"], &["a1"]);
    for b in Baseline::ALL {
        let sol = b.run(&ilp, &map(&[("p1", 0.5), ("p2", 0.4)]), &map(&[("p1", 50.0), ("p2", 40.0)]), 3);
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.status, Status::Feasible);
    }
}

#[test]
fn single_pair_is_taken() {
    let ilp = instance(&[("p1", "a1", "f1")], &["p1"], &["a1"]);
    assert_eq!(b1_random(&ilp, 9).chosen, vec![Triple::new("p1", "a1", "f1")]);
}

#[test]
fn priority_orders_and_ties() {
    let ilp = instance(&[("p1", "a1", "f1"), ("p2", "a1", "f1")], &["p1", "p2"], &["a1"]);
    let served = |sol: medevac_core::solver::Solution| sol.chosen[0].casualty.clone();
    assert_eq!(served(b2_triage_priority(&ilp, &map(&[("p1", 0.3), ("p2", 0.7)]), 0)), "p2");
    assert_eq!(served(b2_triage_priority(&ilp, &map(&[("p1", 0.5), ("p2", 0.5)]), 0)), "p1");
    assert_eq!(served(b3_rtd_priority(&ilp, &map(&[("p1", 30.0), ("p2", 70.0)]), 0)), "p1");
    assert_eq!(served(b3_rtd_priority(&ilp, &map(&[("p1", 50.0), ("p2", 20.0)]), 0)), "p2");
    assert_eq!(served(b3_rtd_priority(&ilp, &map(&[("p1", 50.0), ("p2", 50.0)]), 0)), "p1");
}

#[test]
fn seeds_are_deterministic() {
    let ilp = instance(
        &[("p1", "a1", "f1"), ("p1", "a2", "f1"), ("p2", "a1", "f1"), ("p2", "a2", "f2"), ("p3", "a1", "f2")],
        &["p1", "p2", "p3"],
        &["a1", "a2"],
    );
    for seed in 0..20 {
        assert_eq!(b1_random(&ilp, seed), b1_random(&ilp, seed));
    }
    let outcomes: BTreeSet<Vec<Triple>> = (0..50).map(|s| b1_random(&ilp, s).chosen).collect();
    assert!(outcomes.len() > 1, "random baseline never varied");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn baselines_are_feasible_and_bounded_by_the_optimum(seed in 0u64..100_000, bseed in 0u64..1000) {
        let mut ilp = random_instance(seed);
        ilp.forced.clear();
        ilp.infeasible_forced.clear();
        let opt = solve(&ilp).unwrap();
        let scr: BTreeMap<String, f64> = ilp.casualties.iter().enumerate().map(|(i, p)| (p.clone(), i as f64 / 10.0)).collect();
        let rtd: BTreeMap<String, f64> = scr.iter().map(|(p, s)| (p.clone(), 100.0 * s)).collect();
        for b in Baseline::ALL {
            let sol = b.run(&ilp, &scr, &rtd, bseed);
            check_solution(&ilp, &sol).map_err(|e| TestCaseError::fail(format!("{b:?}: {e}")))?;
            prop_assert!(sol.scaled_value <= opt.scaled_value);
        }
    }
}

/// Forced choice: fewer assets than casualties and every casualty can use
/// every asset, so the only decision is whom to serve.
fn forced_choice(n: usize, k: usize, seed: u64) -> (IlpInstance, BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let ps: Vec<String> = (1..=n).map(|i| format!("p{i:02}")).collect();
    let as_: Vec<String> = (1..=k).map(|i| format!("a{i:02}")).collect();
    let mut triples = Vec::new();
    for p in &ps {
        for a in &as_ {
            triples.push((p.as_str(), a.as_str(), "f1"));
        }
    }
    let ilp = instance(&triples, &ps.iter().map(String::as_str).collect::<Vec<_>>(), &as_.iter().map(String::as_str).collect::<Vec<_>>());
    let scr: BTreeMap<String, f64> =
        ps.iter().enumerate().map(|(i, p)| (p.clone(), ((seed * 7919 + i as u64 * 104_729) % 1000) as f64 / 1000.0)).collect();
    let rtd = scr.iter().map(|(p, s)| (p.clone(), 100.0 * s)).collect();
    (ilp, scr, rtd)
}

#[test]
fn triage_order_is_not_worse_than_random_on_forced_choice() {
    for seed in 0..20 {
        let (ilp, scr, rtd) = forced_choice(8, 3, seed);
        let runs = |b: Baseline| (0..100).map(|rs| b.run(&ilp, &scr, &rtd, rs)).collect::<Vec<_>>();
        let (b1, b2) = (runs(Baseline::B1), runs(Baseline::B2));
        let count = |v: &[medevac_core::solver::Solution]| v.iter().map(|s| s.chosen.len()).sum::<usize>() as f64 / 100.0;
        let served_scr = |v: &[medevac_core::solver::Solution]| {
            v.iter().flat_map(|s| s.chosen.iter().map(|t| scr[&t.casualty])).sum::<f64>() / 100.0
        };
        assert!(count(&b2) >= count(&b1), "seed {seed}");
        assert!(served_scr(&b2) >= served_scr(&b1), "seed {seed}");
    }
}

/// Deadline-only instance and scores for a generated scenario.
fn staged(seed: u64, k: usize) -> (IlpInstance, BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let s = generate(&GenConfig::new(25, 10, k, seed)).unwrap();
    let run = Strategy::urgency().execute(&s, RunMode::Single, StagingConfig::default()).unwrap();
    let p = run.problems.into_iter().next().unwrap();
    (p.ilp, p.staged.scores.scr, p.staged.scores.rtd)
}

#[test]
fn generated_instances_are_feasible_for_every_baseline() {
    for seed in 0..10 {
        let (ilp, scr, rtd) = staged(seed, 6);
        let opt = solve(&ilp).unwrap();
        for b in Baseline::ALL {
            let sol = b.run(&ilp, &scr, &rtd, seed);
            check_solution(&ilp, &sol).unwrap();
            assert!(sol.scaled_value <= opt.scaled_value);
        }
    }
}
