use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use medevac_core::staging::{ConstraintSpec, ObjectiveSpec};
use medevac_core::strategy::Strategy;
use medevac_core::triage::{Asset, Casualty, Facility, Location, Scenario};
use medevac_service::{router, AppState, Store};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Api {
    app: Router,
    _dir: tempfile::TempDir,
}

impl Api {
    fn new() -> Api {
        let dir = tempfile::tempdir().unwrap();
        Api { app: router(AppState::new(Store::open(dir.path()).unwrap())), _dir: dir }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<String>) -> (StatusCode, String) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map(Body::from).unwrap_or_else(Body::empty))
            .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn get(&self, uri: &str) -> (StatusCode, String) {
        self.call(Method::GET, uri, None).await
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        let (s, b) = self.call(Method::POST, uri, Some(body.to_string())).await;
        (s, serde_json::from_str(&b).unwrap())
    }

    async fn create(&self, uri: &str, body: Value) -> String {
        let (s, v) = self.post(uri, body).await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        v["id"].as_str().unwrap().to_string()
    }

    async fn run(&self, scenario: &str, strategy: &str, mode: &str) -> Value {
        let (s, v) = self.post("/runs", json!({ "scenarioId": scenario, "strategyId": strategy, "mode": mode })).await;
        assert!(s == StatusCode::ACCEPTED || s == StatusCode::OK, "{s} {v}");
        let id = v["id"].as_str().unwrap().to_string();
        for _ in 0..500 {
            let (_, body) = self.get(&format!("/runs/{id}")).await;
            let record: Value = serde_json::from_str(&body).unwrap();
            if record["status"] != "queued" {
                return record;
            }
            tokio::time::sleep(Duration::from_millis(10)).await;
        }
        panic!("run {id} never finished");
    }
}

fn casualty(name: &str, ais: &[u8], lat: f64) -> Casualty {
    Casualty {
        name: name.into(),
        ais: ais.to_vec(),
        sbp: None,
        rr: None,
        gcs: None,
        location: Location::new(lat, -110.0),
        insults_available: true,
        vitals_available: false,
    }
}

fn tiny() -> Scenario {
    Scenario {
        casualties: vec![casualty("p1", &[4, 3], 35.2), casualty("p2", &[1], 35.3)],
        assets: vec![Asset { name: "a1".into(), location: Location::new(35.0, -110.0), range: 800.0, speed: 200.0, duty_hours: 12.0 }],
        facilities: vec![Facility { name: "f1".into(), location: Location::new(35.5, -110.0), capacity: None }],
        seed: 1,
    }
}

fn strategy_json(s: &Strategy) -> Value {
    serde_json::to_value(s).unwrap()
}

#[tokio::test]
async fn scenarios_generate_validate_and_round_trip() {
    let api = Api::new();
    let id = api.create("/scenarios", json!({ "n": 5, "m": 2, "k": 2, "seed": 3 })).await;
    let (s, body) = api.get(&format!("/scenarios/{id}")).await;
    assert_eq!(s, StatusCode::OK);
    let generated: Scenario = serde_json::from_str(&body).unwrap();
    assert_eq!(generated.casualties.len(), 5);
    // Same config, same content, same id.
    assert_eq!(api.create("/scenarios", json!({ "n": 5, "m": 2, "k": 2, "seed": 3 })).await, id);

    assert_eq!(api.post("/scenarios", json!({ "n": -1 })).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(api.post("/scenarios", json!({ "vitalsMissingProb": 2.0 })).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = api.call(Method::POST, "/scenarios", Some("{not json".into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let upload = serde_json::to_value(tiny()).unwrap();
    let id = api.create("/scenarios", upload.clone()).await;
    let (_, body) = api.get(&format!("/scenarios/{id}")).await;
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap(), upload);

    let mut dup = upload.clone();
    dup["assets"][0]["name"] = json!("f1");
    dup["facilities"][0]["name"] = json!("p1");
    dup["casualties"][1]["name"] = json!("p1");
    assert_eq!(api.post("/scenarios", dup).await.0, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let api = Api::new();
    for uri in ["/scenarios/0123abcd", "/strategies/00ff", "/strategies/00ff/facts", "/runs/00", "/runs/00/outcome", "/scenarios/..%2Fx"] {
        assert_eq!(api.get(uri).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
    let strategy = api.create("/strategies", strategy_json(&Strategy::urgency())).await;
    let (s, v) = api.post("/runs", json!({ "scenarioId": "deadbeef", "strategyId": strategy, "mode": "single" })).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"].as_str().unwrap().contains("scenario"));
    let scenario = api.create("/scenarios", serde_json::to_value(tiny()).unwrap()).await;
    let (s, _) = api.post("/runs", json!({ "scenarioId": scenario, "strategyId": strategy, "mode": "sideways" })).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn strategies_compile_to_facts() {
    let api = Api::new();
    let s = Strategy::single(ObjectiveSpec::ReverseTriage, &[ConstraintSpec::Lsi]);
    let id = api.create("/strategies", strategy_json(&s)).await;
    let (_, body) = api.get(&format!("/strategies/{id}/facts")).await;
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap(), json!({ "facts": ["use_o(o_rtd, 1)", "use_c(c_lsi, 1)"] }));

    let three = json!({
        "objectives": [
            { "index": 1, "objective": "urgency" },
            { "index": 2, "objective": "reverseTriage" },
            { "index": 3, "objective": "urgency" }
        ],
        "constraints": [
            { "index": 1, "kind": "lsi" },
            { "index": 2, "kind": "scrThreshold", "k": 0.8 },
            { "index": 3, "kind": "airTime", "k": 2.0 }
        ]
    });
    let id = api.create("/strategies", three).await;
    let (_, body) = api.get(&format!("/strategies/{id}/facts")).await;
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["facts"].as_array().unwrap().len(), 6);

    let twice = json!({ "objectives": [{ "index": 1, "objective": "urgency" }, { "index": 1, "objective": "reverseTriage" }] });
    let (s, v) = api.post("/strategies", twice).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    assert_eq!(api.post("/strategies", json!({ "objectives": [] })).await.0, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn single_run_explain_and_problems() {
    let api = Api::new();
    let scenario = api.create("/scenarios", serde_json::to_value(tiny()).unwrap()).await;
    let strategy = api.create("/strategies", strategy_json(&Strategy::reverse())).await;
    let record = api.run(&scenario, &strategy, "single").await;
    assert_eq!(record["status"], "done", "{record}");
    assert_eq!(record["result"]["mode"], "single");
    let id = record["id"].as_str().unwrap();

    let (s, outcome) = api.get(&format!("/runs/{id}/outcome")).await;
    assert_eq!(s, StatusCode::OK);
    let outcome: Value = serde_json::from_str(&outcome).unwrap();
    let evac: Vec<&Value> =
        outcome[0]["facts"].as_array().unwrap().iter().filter(|f| f["atom"]["predicate"] == "evac").collect();
    assert_eq!(evac.len(), 1);

    let (s, body) = api.get(&format!("/runs/{id}/explain?atom=evac(p2,1)")).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let v: Value = serde_json::from_str(&body).unwrap();
    // Injected solver facts are base facts: the trace stops right there.
    assert!(v["tree"]["rule_id"].is_null(), "{v}");
    assert_eq!(v["tree"]["literal"]["atom"]["predicate"], "evac");
    assert!(v["tree"].get("premises").is_none(), "{v}");
    assert!(v["trace"].as_str().unwrap().contains("[fact]"));

    let (s, body) = api.get(&format!("/runs/{id}/explain?atom=selected_score(p1,X)")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{body}");
    assert_eq!(api.get(&format!("/runs/{id}/explain?atom=evac(p1,1)")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(api.get(&format!("/runs/{id}/explain?atom=evac((")).await.0, StatusCode::BAD_REQUEST);

    let (s, body) = api.get(&format!("/runs/{id}/problems")).await;
    assert_eq!(s, StatusCode::OK);
    let problems: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(problems.as_array().unwrap().len(), 1);
    assert!(!problems[0]["ilp"]["variables"].as_array().unwrap().is_empty(), "{problems}");

    // Reposting returns the same run; repeated GETs are identical.
    let again = api.run(&scenario, &strategy, "single").await;
    assert_eq!(again["id"], record["id"]);
    for uri in [format!("/runs/{id}"), format!("/runs/{id}/outcome"), format!("/runs/{id}/problems")] {
        assert_eq!(api.get(&uri).await, api.get(&uri).await);
    }
}

#[tokio::test]
async fn explain_rebuilds_after_restart() {
    let dir = tempfile::tempdir().unwrap();
    let first = Api { app: router(AppState::new(Store::open(dir.path()).unwrap())), _dir: tempfile::tempdir().unwrap() };
    let scenario = first.create("/scenarios", serde_json::to_value(tiny()).unwrap()).await;
    let strategy = first.create("/strategies", strategy_json(&Strategy::reverse())).await;
    let id = first.run(&scenario, &strategy, "single").await["id"].as_str().unwrap().to_string();
    let uri = format!("/runs/{id}/explain?atom=evac(p2,1)");
    let before = first.get(&uri).await;
    let second = Api { app: router(AppState::new(Store::open(dir.path()).unwrap())), _dir: tempfile::tempdir().unwrap() };
    assert_eq!(second.get(&uri).await, before);
}

#[tokio::test]
async fn other_modes_and_failures() {
    let api = Api::new();
    let scenario = api.create("/scenarios", json!({ "n": 8, "m": 3, "k": 2, "seed": 11 })).await;
    let urgency = api.create("/strategies", strategy_json(&Strategy::urgency())).await;
    let relax = api.run(&scenario, &urgency, "relax").await;
    assert_eq!(relax["status"], "done", "{relax}");
    assert_eq!(relax["result"]["mode"], "relax");
    assert_eq!(api.get(&format!("/runs/{}/outcome", relax["id"].as_str().unwrap())).await.1.trim(), "[]");
    let (s, _) = api.get(&format!("/runs/{}/explain?atom=evac(p01,1)", relax["id"].as_str().unwrap())).await;
    assert_eq!(s, StatusCode::CONFLICT);

    let seq = api.run(&scenario, &urgency, "sequential").await;
    assert_eq!(seq["status"], "done", "{seq}");
    assert!(seq["result"]["rounds"].is_array());

    let two = json!({
        "objectives": [{ "index": 1, "objective": "urgency" }, { "index": 2, "objective": "reverseTriage" }],
        "constraints": [{ "index": 1, "kind": "lsi" }, { "index": 2, "kind": "lsi" }]
    });
    let two = api.create("/strategies", two).await;
    let multi = api.run(&scenario, &two, "multi").await;
    assert_eq!(multi["status"], "done", "{multi}");
    assert!(multi["result"]["selected"].is_u64());

    // Single mode with two objectives fails with the reason attached.
    let failed = api.run(&scenario, &two, "single").await;
    assert_eq!(failed["status"], "failed");
    assert!(failed["error"].as_str().unwrap().contains("single"), "{failed}");
    assert_eq!(api.get(&format!("/runs/{}/outcome", failed["id"].as_str().unwrap())).await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn spec_lists_every_route() {
    let api = Api::new();
    let (s, body) = api.get("/spec").await;
    assert_eq!(s, StatusCode::OK);
    let doc: Value = serde_json::from_str(&body).unwrap();
    for path in [
        "/scenarios",
        "/scenarios/{id}",
        "/strategies",
        "/strategies/{id}",
        "/strategies/{id}/facts",
        "/runs",
        "/runs/{id}",
        "/runs/{id}/outcome",
        "/runs/{id}/explain",
        "/runs/{id}/problems",
        "/spec",
    ] {
        assert!(doc["paths"].get(path).is_some(), "{path}");
    }
}

#[tokio::test]
async fn concurrent_runs_are_isolated() {
    let api = Arc::new(Api::new());
    let urgency = api.create("/strategies", strategy_json(&Strategy::urgency())).await;
    let mut handles = Vec::new();
    for seed in 0..6u64 {
        let api = api.clone();
        let urgency = urgency.clone();
        handles.push(tokio::spawn(async move {
            let scenario = api.create("/scenarios", json!({ "n": 10, "m": 3, "k": 3, "seed": seed })).await;
            api.run(&scenario, &urgency, "single").await
        }));
    }
    for h in handles {
        assert_eq!(h.await.unwrap()["status"], "done");
    }
}
