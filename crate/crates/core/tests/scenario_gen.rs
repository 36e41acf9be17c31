use medevac_core::scenario_gen::{generate, load, save, BoundingBox, GenConfig, GenError};
use medevac_core::triage::{niss_score, rts_score, Location};
use proptest::prelude::*;

#[test]
fn same_seed_is_byte_identical() {
    let cfg = GenConfig::new(25, 10, 5, 7);
    let a = serde_json::to_string(&generate(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&generate(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = serde_json::to_string(&generate(&GenConfig::new(25, 10, 5, 8)).unwrap()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn zero_casualties() {
    let s = generate(&GenConfig::new(0, 3, 2, 1)).unwrap();
    assert!(s.casualties.is_empty());
    assert_eq!((s.facilities.len(), s.assets.len()), (3, 2));
}

#[test]
fn full_sized_scenario_stays_in_the_box() {
    let s = generate(&GenConfig::new(25, 10, 5, 7)).unwrap();
    assert_eq!((s.casualties.len(), s.facilities.len(), s.assets.len()), (25, 10, 5));
    let inside = |l: Location| (31.33..=42.00).contains(&l.lat) && (-114.82..=-102.04).contains(&l.lon);
    assert!(s.casualties.iter().all(|c| inside(c.location)));
    assert!(s.assets.iter().all(|a| inside(a.location)));
    assert!(s.facilities.iter().all(|f| inside(f.location)));
    assert_eq!(s.casualties[0].name, "p01");
    assert_eq!(s.assets[4].name, "a05");
    assert_eq!(s.facilities[9].name, "f10");
}

#[test]
fn invalid_configs() {
    let mut cfg = GenConfig::new(3, 1, 1, 0);
    cfg.vitals_missing_prob = 1.5;
    assert!(matches!(generate(&cfg), Err(GenError::InvalidConfig(_))));
    let mut cfg = GenConfig::new(3, 1, 1, 0);
    cfg.bounding_box = BoundingBox { lat_min: 40.0, lat_max: 40.0, lon_min: -110.0, lon_max: -100.0 };
    assert!(matches!(generate(&cfg), Err(GenError::InvalidConfig(_))));
    assert!(serde_json::from_str::<GenConfig>(r#"{"n": -1}"#).is_err());
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let s = generate(&GenConfig::new(6, 2, 3, 11)).unwrap();
    save(&s, &path).unwrap();
    assert_eq!(load(&path).unwrap(), s);
}

#[test]
fn missing_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"casualties": [], "facilities": [], "seed": 1}"#).unwrap();
    let err = load(&path).unwrap_err().to_string();
    assert!(err.contains("missing field `assets`"), "{err}");
    std::fs::write(&path, "{\n  \"casualties\": [,\n").unwrap();
    let err = load(&path).unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn hand_written_fixture_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    std::fs::write(
        &path,
        r#"{
  "casualties": [{"name": "p1", "ais": [4, 3, 1], "sbp": 88, "rr": 31, "gcs": 12,
                  "location": [35.5, -110.25], "insultsAvailable": true, "vitalsAvailable": true}],
  "assets": [{"name": "a1", "location": [35.0, -110.0], "range": 600.0, "speed": 250.0, "dutyHours": 8.0}],
  "facilities": [{"name": "f1", "location": [36.0, -111.0]}],
  "seed": 0
}"#,
    )
    .unwrap();
    let s = load(&path).unwrap();
    let c = &s.casualties[0];
    assert_eq!((c.ais.as_slice(), c.sbp, c.rr, c.gcs), (&[4u8, 3, 1][..], Some(88), Some(31), Some(12)));
    assert_eq!(c.location, Location::new(35.5, -110.25));
    // 16 + 9 + 1 = 26; SBP 88 -> 3, RR 31 -> 3, GCS 12 -> 3.
    assert_eq!(niss_score(c).unwrap().raw, 26);
    assert_eq!(rts_score(c).unwrap().raw, 9);
    assert_eq!(s.assets[0].duty_hours, 8.0);
    assert_eq!(s.facilities[0].capacity, None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_values_stay_in_range(seed in any::<u64>(), n in 0usize..40, m in 0usize..8, k in 0usize..8) {
        let cfg = GenConfig::new(n, m, k, seed);
        let s = generate(&cfg).unwrap();
        prop_assert_eq!((s.casualties.len(), s.facilities.len(), s.assets.len()), (n, m, k));
        s.validate().unwrap();
        for c in &s.casualties {
            prop_assert!(cfg.bounding_box.contains(c.location));
            if c.insults_available {
                prop_assert!((1..=4).contains(&c.ais.len()));
                prop_assert!(c.ais.iter().all(|&a| a <= 5));
                prop_assert!(niss_score(c).is_ok());
            } else {
                prop_assert!(c.ais.is_empty());
            }
            if c.vitals_available {
                prop_assert!(c.sbp.unwrap() <= 180 && c.rr.unwrap() <= 40);
                prop_assert!((3..=15).contains(&c.gcs.unwrap()));
                prop_assert!(rts_score(c).is_ok());
            } else {
                prop_assert!(c.sbp.is_none() && c.rr.is_none() && c.gcs.is_none());
            }
        }
        for a in &s.assets {
            prop_assert!(cfg.bounding_box.contains(a.location));
            prop_assert!((150.0..=300.0).contains(&a.speed));
            prop_assert!((300.0..=800.0).contains(&a.range));
            prop_assert!((4.0..=12.0).contains(&a.duty_hours));
        }
    }
}
