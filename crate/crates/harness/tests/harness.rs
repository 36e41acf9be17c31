use std::fs;

use medevac_core::orchestrator::ThresholdFamily;
use medevac_core::scenario_gen::GenConfig;
use medevac_core::staging::ObjectiveSpec;
use medevac_core::strategy::Strategy;
use medevac_core::triage::{Asset, Casualty, Facility, Location, Scenario};
use medevac_harness::*;

fn small_grid(ks: Vec<usize>, seeds: u64, methods: Vec<Method>) -> GridSpec {
    GridSpec { n: 12, m: 4, ks, seeds, methods, ..GridSpec::standard() }
}

#[test]
fn one_cell_two_methods_two_rows() {
    let r = run_grid(&small_grid(vec![3], 1, vec![Method::Urgency, Method::B1])).unwrap();
    assert_eq!(r.metrics.len(), 2);
    assert_eq!(r.timings.len(), 2);
    assert_eq!(r.metrics[0].seed, cell_seed(0, 3, 0));
}

#[test]
fn invalid_grids() {
    assert!(run_grid(&small_grid(vec![], 1, vec![Method::B1])).is_err());
    assert!(run_grid(&small_grid(vec![1], 0, vec![Method::B1])).is_err());
    assert!(run_grid(&small_grid(vec![1], 1, vec![])).is_err());
}

#[test]
fn optimizers_dominate_baselines_row_wise() {
    let r = run_grid(&small_grid(vec![1, 3, 6, 12], 3, Method::ALL.to_vec())).unwrap();
    for chunk in r.metrics.chunks(Method::ALL.len()) {
        let get = |m: Method| chunk.iter().find(|x| x.method == m).unwrap();
        for b in [Method::B1, Method::B2, Method::B3] {
            assert!(get(Method::Urgency).scr_scaled >= get(b).scr_scaled, "{:?}", get(b));
            assert!(get(Method::Reverse).rtd_scaled >= get(b).rtd_scaled, "{:?}", get(b));
        }
        assert!(get(Method::Urgency).scr_scaled >= get(Method::Situational).scr_scaled);
    }
    let cross = cross_criteria(&r.metrics);
    let own = |m: Method, o: ObjectiveSpec| cross.iter().find(|c| c.solved_by == m && c.evaluated_under == o).unwrap().mean_ratio;
    assert!((own(Method::Urgency, ObjectiveSpec::Urgency) - 1.0).abs() < 1e-12);
    assert!((own(Method::Reverse, ObjectiveSpec::ReverseTriage) - 1.0).abs() < 1e-12);
    assert!(own(Method::Urgency, ObjectiveSpec::ReverseTriage) <= 1.0 + 1e-12);
}

#[test]
fn reruns_write_identical_csvs_and_plots_come_from_them() {
    let spec = GridSpec { parallel: true, ..small_grid(vec![2, 5], 2, Method::ALL.to_vec()) };
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_grid(d1.path(), &run_grid(&spec).unwrap()).unwrap();
    write_grid(d2.path(), &run_grid(&GridSpec { parallel: false, ..spec.clone() }).unwrap()).unwrap();
    for f in ["metrics.csv", "summary.csv", "cross_criteria.csv", "evacuated.svg", "total_scr.svg"] {
        assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
    let before = fs::read(d1.path().join("summary.csv")).unwrap();
    plot::grid_plots(d1.path()).unwrap();
    assert_eq!(before, fs::read(d1.path().join("summary.csv")).unwrap());
    let header = fs::read_to_string(d1.path().join("metrics.csv")).unwrap();
    assert!(header.starts_with("k,seed,method,status,evacuated,unserved,totalScr,scrValue,rtdValue,scrScaled,rtdScaled\n"));
    assert!(!header.contains("ms"));
    let rows: Vec<MetricRow> = read_csv(&d1.path().join("metrics.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 6);
}

fn compact(n: usize, k: usize) -> Scenario {
    let c = |i: usize| Casualty {
        name: format!("p{i}"),
        ais: vec![5, 5, 5],
        sbp: None,
        rr: None,
        gcs: None,
        location: Location::new(35.0 + 0.01 * i as f64, -110.0),
        insults_available: true,
        vitals_available: false,
    };
    Scenario {
        casualties: (1..=n).map(c).collect(),
        assets: (1..=k)
            .map(|i| Asset { name: format!("a{i}"), location: Location::new(35.0, -110.01 * i as f64 / i as f64), range: 800.0, speed: 200.0, duty_hours: 12.0 })
            .collect(),
        facilities: vec![Facility { name: "f1".into(), location: Location::new(35.1, -110.0), capacity: None }],
        seed: 0,
    }
}

#[test]
fn relaxation_endpoints() {
    let spec = RelaxSpec::standard();
    // Everyone scores 1.0 and is reachable: enough assets keep the strictest rung.
    let rows = relax_scenario(&compact(3, 3), 3, 0, &spec).unwrap();
    let scr = rows.iter().find(|r| r.family == ThresholdFamily::ScrThreshold).unwrap();
    assert_eq!(scr.chosen_k, Some(0.5));
    assert_eq!(scr.pattern, "OOOOOO");
    // No assets: only the fully relaxed rungs are feasible.
    let rows = relax_scenario(&compact(3, 0), 0, 0, &spec).unwrap();
    let scr = rows.iter().find(|r| r.family == ThresholdFamily::ScrThreshold).unwrap();
    let rtd = rows.iter().find(|r| r.family == ThresholdFamily::RtdThreshold).unwrap();
    assert_eq!((scr.chosen_k, scr.pattern.as_str()), (Some(1.0), "IIIIIO"));
    // Scores of 1.0 put every hours estimate above the ladder, so no one is forced.
    assert_eq!(rtd.chosen_k, Some(50.0));
    assert!(rows.iter().all(|r| r.monotone));
}

#[test]
fn relaxation_grid_is_monotone_and_reproducible() {
    let spec = RelaxSpec { grid: small_grid(vec![1, 6, 12], 3, vec![Method::Urgency]), ..RelaxSpec::standard() };
    let rows = run_relaxation(&spec).unwrap();
    assert_eq!(rows.len(), 3 * 3 * 2);
    assert!(rows.iter().all(|r| r.monotone), "{rows:?}");
    assert_eq!(rows, run_relaxation(&spec).unwrap());
    let summary = summarize_relaxation(&rows);
    assert_eq!(summary.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    write_relaxation(dir.path(), &rows).unwrap();
    assert!(dir.path().join("relaxation_scr.svg").exists());
    let back: Vec<RelaxRow> = read_csv(&dir.path().join("relaxation.csv")).unwrap();
    assert_eq!(back, rows);
}

#[test]
fn sequential_experiment_writes_a_valid_schedule() {
    let cfg = GenConfig::new(10, 3, 3, 5);
    let (scenario, schedule) = run_sequential(&cfg, &Strategy::urgency()).unwrap();
    schedule.validate(&scenario).unwrap();
    assert_eq!(schedule.evacuated.len() + schedule.expired.len() + schedule.unserved.len(), 10);
    let dir = tempfile::tempdir().unwrap();
    write_schedule(dir.path(), &schedule).unwrap();
    let csv = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + schedule.missions().count());
    let svg = fs::read_to_string(dir.path().join("schedule.svg")).unwrap();
    assert_eq!(svg.matches("<rect x=").count(), schedule.missions().count());
}

#[test]
fn averted_fraction() {
    let row = |method, unserved| MetricRow {
        k: 1,
        seed: 0,
        method,
        status: medevac_core::solver::Status::Optimal,
        evacuated: 10 - unserved,
        unserved,
        total_scr: 0.0,
        scr_value: 0.0,
        rtd_value: 0.0,
        scr_scaled: 0,
        rtd_scaled: 0,
    };
    let rows = vec![row(Method::Urgency, 6), row(Method::B1, 8)];
    assert!((averted(&rows, Method::Urgency, Method::B1) - 0.25).abs() < 1e-12);
    assert_eq!("b2".parse::<Method>(), Ok(Method::B2));
    assert!("b4".parse::<Method>().is_err());
}
