use std::collections::BTreeSet;

use medevac_core::solver::{brute_force, check_solution, random_instance, solve, Status};
use medevac_core::staging::IlpInstance;
use proptest::prelude::*;

#[test]
fn solve_matches_brute_force_on_200_instances() {
    for seed in 0..200 {
        let ilp = random_instance(seed);
        let fast = solve(&ilp).unwrap();
        let slow = brute_force(&ilp).unwrap();
        assert_eq!(fast.status, slow.status, "seed {seed}");
        assert_eq!(fast.scaled_value, slow.scaled_value, "seed {seed}");
        assert_eq!(fast.chosen, slow.chosen, "seed {seed}: tie-breaking differs");
        check_solution(&ilp, &fast).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

/// Value of the instance after replacing the chosen set, or None if infeasible.
fn value_of(ilp: &IlpInstance, chosen: &[(usize, bool)]) -> Option<i64> {
    let picks: Vec<_> = chosen.iter().filter(|(_, on)| *on).map(|(i, _)| &ilp.variables[*i]).collect();
    let casualties: BTreeSet<_> = picks.iter().map(|v| &v.triple.casualty).collect();
    if casualties.len() != picks.len() || ilp.forced.iter().any(|p| !casualties.contains(p)) {
        return None;
    }
    for a in &ilp.assets {
        if picks.iter().filter(|v| &v.triple.asset == a).count() > ilp.capacity as usize {
            return None;
        }
    }
    Some(picks.iter().map(|v| v.scaled_weight()).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_single_insertion_or_swap_improves(seed in 1000u64..100_000) {
        let ilp = random_instance(seed);
        let sol = solve(&ilp).unwrap();
        prop_assume!(sol.status == Status::Optimal);
        let chosen: Vec<usize> = sol
            .chosen
            .iter()
            .map(|t| ilp.variables.iter().position(|v| &v.triple == t).unwrap())
            .collect();
        let base: Vec<(usize, bool)> = chosen.iter().map(|&i| (i, true)).collect();
        for add in 0..ilp.variables.len() {
            let mut with = base.clone();
            with.push((add, true));
            if let Some(v) = value_of(&ilp, &with) {
                prop_assert!(v <= sol.scaled_value);
            }
            for drop in 0..base.len() {
                let mut swapped = with.clone();
                swapped[drop].1 = false;
                if let Some(v) = value_of(&ilp, &swapped) {
                    prop_assert!(v <= sol.scaled_value);
                }
            }
        }
    }

    #[test]
    fn dropping_a_forced_casualty_keeps_feasibility(seed in 0u64..100_000) {
        let ilp = random_instance(seed);
        let before = solve(&ilp).unwrap();
        prop_assume!(before.status == Status::Optimal && !ilp.forced.is_empty());
        let mut relaxed = ilp.clone();
        let first = relaxed.forced.iter().next().unwrap().clone();
        relaxed.forced.remove(&first);
        let after = solve(&relaxed).unwrap();
        prop_assert_eq!(after.status, Status::Optimal);
        prop_assert!(after.scaled_value >= before.scaled_value);
    }

    #[test]
    fn optimum_is_invariant_under_renaming(seed in 0u64..100_000) {
        // Reverse the name order of casualties and assets; the optimal value
        // must not change even though tie-breaking may.
        let ilp = random_instance(seed);
        let mut renamed = ilp.clone();
        let flip = |s: &str| {
            let (prefix, n) = s.split_at(1);
            format!("{prefix}{}", 10 - n.parse::<u32>().unwrap())
        };
        for v in &mut renamed.variables {
            v.triple.casualty = flip(&v.triple.casualty);
            v.triple.asset = flip(&v.triple.asset);
        }
        renamed.variables.sort_by(|a, b| a.triple.cmp(&b.triple));
        renamed.casualties = ilp.casualties.iter().map(|p| flip(p)).rev().collect();
        renamed.assets = ilp.assets.iter().map(|a| flip(a)).rev().collect();
        renamed.forced = ilp.forced.iter().map(|p| flip(p)).collect();
        renamed.infeasible_forced = ilp.infeasible_forced.iter().map(|p| flip(p)).collect();
        let a = solve(&ilp).unwrap();
        let b = solve(&renamed).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.scaled_value, b.scaled_value);
    }

    #[test]
    fn unit_capacity_bounds_the_selection(seed in 0u64..100_000) {
        let mut ilp = random_instance(seed);
        ilp.capacity = 1;
        let sol = solve(&ilp).unwrap();
        prop_assert!(sol.chosen.len() <= ilp.assets.len().min(ilp.casualties.len()));
    }
}
