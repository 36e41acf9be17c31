use medevac_core::staging::{ConstraintSpec, ObjectiveSpec, StagingConfig};
use medevac_core::strategy::{IndexedConstraint, IndexedObjective, RunMode, RunResult, Strategy, StrategyError};
use medevac_core::triage::{Asset, Casualty, Facility, Location, Scenario};

fn facts(s: &Strategy) -> Vec<String> {
    s.compile_facts().iter().map(ToString::to_string).collect()
}

#[test]
fn reverse_with_deadline_compiles_to_two_facts() {
    let s = Strategy::single(ObjectiveSpec::ReverseTriage, &[ConstraintSpec::Lsi]);
    assert_eq!(facts(&s), ["use_o(o_rtd, 1)", "use_c(c_lsi, 1)"]);
}

fn three_problems() -> Strategy {
    let mut s = Strategy::urgency();
    s.objectives.push(IndexedObjective { index: 2, objective: ObjectiveSpec::ReverseTriage });
    s.objectives.push(IndexedObjective { index: 3, objective: ObjectiveSpec::Urgency });
    s.constraints.push(IndexedConstraint { index: 2, constraint: ConstraintSpec::Lsi });
    s.constraints.push(IndexedConstraint { index: 3, constraint: ConstraintSpec::ScrThreshold { k: 0.7 } });
    s
}

#[test]
fn three_problems_compile_to_six_facts() {
    let s = three_problems();
    s.validate().unwrap();
    assert_eq!(
        facts(&s),
        [
            "use_o(o_scr, 1)",
            "use_c(c_lsi, 1)",
            "use_o(o_rtd, 2)",
            "use_c(c_lsi, 2)",
            "use_o(o_scr, 3)",
            "use_c(c_scr, 0.7, 3)"
        ]
    );
}

#[test]
fn invalid_strategies() {
    let mut dup = Strategy::urgency();
    dup.objectives.push(IndexedObjective { index: 1, objective: ObjectiveSpec::ReverseTriage });
    assert!(matches!(dup.validate(), Err(StrategyError::DuplicateObjective(1))));

    let mut gap = Strategy::urgency();
    gap.objectives[0].index = 2;
    assert!(matches!(gap.validate(), Err(StrategyError::NonContiguous { .. })));

    let mut orphan = Strategy::urgency();
    orphan.constraints[0].index = 4;
    assert!(matches!(orphan.validate(), Err(StrategyError::OrphanConstraint(4))));

    let mut empty = Strategy::urgency();
    empty.objectives.clear();
    assert!(matches!(empty.validate(), Err(StrategyError::NoObjectives)));

    let mut theta = Strategy::urgency();
    theta.selection_theta = 1.5;
    assert!(matches!(theta.validate(), Err(StrategyError::BadTheta(_))));

    let mut pinned = Strategy::urgency();
    pinned.pinned_selection = Some(2);
    assert!(matches!(pinned.validate(), Err(StrategyError::BadPinnedSelection(2))));
}

#[test]
fn presets_and_json_shape() {
    assert_eq!(facts(&Strategy::situational()), ["use_o(o_scr, 1)", "use_c(c_lsi, 1)", "use_c(c_air, 1, 1)"]);
    assert_eq!(Strategy::preset("reverse"), Some(Strategy::reverse()));
    assert_eq!(Strategy::preset("bogus"), None);
    let json = serde_json::to_value(Strategy::situational()).unwrap();
    assert_eq!(json["objectives"], serde_json::json!([{"index": 1, "objective": "urgency"}]));
    assert_eq!(json["constraints"][1], serde_json::json!({"index": 1, "kind": "airTime", "k": 1.0}));
    assert_eq!(json["selectionTheta"], 0.66);
    let minimal: Strategy =
        serde_json::from_str(r#"{"objectives":[{"index":1,"objective":"reverseTriage"}]}"#).unwrap();
    assert_eq!(minimal.selection_theta, 0.66);
    assert!(minimal.constraints.is_empty());
    let back: Strategy = serde_json::from_value(serde_json::to_value(three_problems()).unwrap()).unwrap();
    assert_eq!(back, three_problems());
}

fn scenario() -> Scenario {
    let c = |name: &str, ais: &[u8], lat| Casualty {
        name: name.into(),
        ais: ais.to_vec(),
        sbp: None,
        rr: None,
        gcs: None,
        location: Location::new(lat, -110.0),
        insults_available: true,
        vitals_available: false,
    };
    Scenario {
        casualties: vec![c("p1", &[5, 3], 35.1), c("p2", &[2], 35.2), c("p3", &[4], 35.3)],
        assets: vec![Asset { name: "a1".into(), location: Location::new(35.0, -110.0), range: 800.0, speed: 200.0, duty_hours: 12.0 }],
        facilities: vec![Facility { name: "f1".into(), location: Location::new(35.5, -110.0), capacity: None }],
        seed: 7,
    }
}

#[test]
fn every_mode_runs() {
    let s = scenario();
    let cfg = StagingConfig::default;
    match Strategy::urgency().execute(&s, RunMode::Single, cfg()).unwrap().result {
        RunResult::Single { outcome } => assert_eq!(outcome.evacuated(), ["p1"]),
        other => panic!("{other:?}"),
    }
    let multi = Strategy { rules: None, ..three_problems() };
    let run = multi.execute(&s, RunMode::Multi, cfg()).unwrap();
    assert_eq!(run.problems.len(), 3);
    assert!(matches!(run.result, RunResult::Multi { ref outcomes, .. } if outcomes.len() == 3));

    let mut pinned = three_problems();
    pinned.pinned_selection = Some(3);
    assert!(matches!(pinned.execute(&s, RunMode::Multi, cfg()).unwrap().result, RunResult::Multi { selected: 3, .. }));

    match Strategy::urgency().execute(&s, RunMode::Relax, cfg()).unwrap().result {
        // NISS of p1 is 34/75 and of p3 16/75; both below 0.5, so nobody is forced.
        RunResult::Relax(r) => assert_eq!(r.chosen_k, Some(0.5)),
        other => panic!("{other:?}"),
    }
    match Strategy::urgency().execute(&s, RunMode::Sequential, cfg()).unwrap().result {
        RunResult::Sequential(sched) => {
            assert_eq!(sched.evacuated.len() + sched.expired.len() + sched.unserved.len(), 3);
            sched.validate(&s).unwrap();
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        three_problems().execute(&s, RunMode::Single, cfg()),
        Err(StrategyError::NeedsOneObjective { count: 3, .. })
    ));
}

#[test]
fn relax_drops_same_family_threshold() {
    let s = scenario();
    let strat = Strategy::single(ObjectiveSpec::Urgency, &[ConstraintSpec::Lsi, ConstraintSpec::ScrThreshold { k: 0.1 }]);
    // With the fixed 0.1 threshold kept, every rung would be infeasible.
    match strat.execute(&s, RunMode::Relax, StagingConfig::default()).unwrap().result {
        RunResult::Relax(r) => assert_eq!(r.chosen_k, Some(0.5)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn extra_rules_are_applied() {
    let s = scenario();
    let mut strat = Strategy::urgency();
    strat.rules = Some("score(p2, 0.99).".into());
    match strat.execute(&s, RunMode::Single, StagingConfig::default()).unwrap().result {
        RunResult::Single { outcome } => assert_eq!(outcome.evacuated(), ["p2"]),
        other => panic!("{other:?}"),
    }
    strat.rules = Some("bogus(".into());
    assert!(matches!(strat.execute(&s, RunMode::Single, StagingConfig::default()), Err(StrategyError::Rules(_))));
    assert_eq!("relax".parse::<RunMode>(), Ok(RunMode::Relax));
    assert!("nope".parse::<RunMode>().is_err());
}
