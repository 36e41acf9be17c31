use serde_json::{json, Value};

fn id_param() -> Value {
    json!({ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } })
}

fn error_response(description: &str) -> Value {
    json!({
        "description": description,
        "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Error" } } }
    })
}

fn get_by_id(summary: &str, extra: &[(&str, &str)]) -> Value {
    let mut responses = json!({ "200": { "description": "OK" }, "404": error_response("unknown id") });
    for (code, description) in extra {
        responses[*code] = error_response(description);
    }
    json!({ "get": { "summary": summary, "parameters": [id_param()], "responses": responses } })
}

pub fn document() -> Value {
    let created = json!({
        "description": "stored",
        "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Created" } } }
    });
    let not_finished = [("409", "run failed or still queued")];
    let mut explain = get_by_id("Derivation tree of a ground atom", &not_finished);
    explain["get"]["parameters"]
        .as_array_mut()
        .expect("parameter list")
        .push(json!({ "name": "atom", "in": "query", "required": true, "schema": { "type": "string" }, "example": "evac(p01)" }));
    explain["get"]["responses"]["400"] = error_response("atom does not parse or is not ground");
    json!({
        "openapi": "3.0.3",
        "info": { "title": "medevac orchestration service", "version": env!("CARGO_PKG_VERSION") },
        "paths": {
            "/scenarios": { "post": {
                "summary": "Store a scenario, or generate one from a generator config",
                "requestBody": { "required": true, "content": { "application/json": { "schema": {
                    "oneOf": [{ "$ref": "#/components/schemas/Scenario" }, { "$ref": "#/components/schemas/GenConfig" }]
                } } } },
                "responses": { "201": created, "400": error_response("malformed JSON"), "422": error_response("invalid scenario or config") }
            } },
            "/scenarios/{id}": get_by_id("Stored scenario", &[]),
            "/strategies": { "post": {
                "summary": "Store a strategy",
                "requestBody": { "required": true, "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Strategy" } } } },
                "responses": { "201": created, "400": error_response("malformed JSON"), "422": error_response("invalid strategy") }
            } },
            "/strategies/{id}": get_by_id("Stored strategy", &[]),
            "/strategies/{id}/facts": get_by_id("use_o and use_c facts compiled from the strategy", &[]),
            "/runs": { "post": {
                "summary": "Start a run; identical requests return the existing run",
                "requestBody": { "required": true, "content": { "application/json": { "schema": { "$ref": "#/components/schemas/RunRequest" } } } },
                "responses": {
                    "200": { "description": "existing run" },
                    "202": { "description": "queued" },
                    "404": error_response("unknown scenario or strategy"),
                    "422": error_response("invalid request")
                }
            } },
            "/runs/{id}": get_by_id("Run status and result", &[]),
            "/runs/{id}/outcome": get_by_id("Outcome facts of every solved problem", &not_finished),
            "/runs/{id}/problems": get_by_id("Staged problems, compiled instances and solutions", &not_finished),
            "/runs/{id}/explain": explain,
            "/spec": { "get": { "summary": "This document", "responses": { "200": { "description": "OK" } } } }
        },
        "components": { "schemas": {
            "Error": { "type": "object", "properties": { "error": { "type": "string" } }, "required": ["error"] },
            "Created": { "type": "object", "properties": { "id": { "type": "string" } }, "required": ["id"] },
            "RunRequest": {
                "type": "object",
                "required": ["scenarioId", "strategyId", "mode"],
                "properties": {
                    "scenarioId": { "type": "string" },
                    "strategyId": { "type": "string" },
                    "mode": { "type": "string", "enum": ["single", "multi", "relax", "sequential"] }
                }
            },
            "GenConfig": {
                "type": "object",
                "properties": {
                    "n": { "type": "integer", "minimum": 0 },
                    "m": { "type": "integer", "minimum": 0 },
                    "k": { "type": "integer", "minimum": 0 },
                    "seed": { "type": "integer", "minimum": 0 },
                    "boundingBox": { "type": "object" },
                    "vitalsMissingProb": { "type": "number" },
                    "insultsMissingProb": { "type": "number" }
                }
            },
            "Scenario": {
                "type": "object",
                "required": ["casualties", "assets", "facilities"],
                "properties": {
                    "casualties": { "type": "array", "items": { "type": "object" } },
                    "assets": { "type": "array", "items": { "type": "object" } },
                    "facilities": { "type": "array", "items": { "type": "object" } },
                    "seed": { "type": "integer" }
                }
            },
            "Strategy": {
                "type": "object",
                "required": ["objectives"],
                "properties": {
                    "objectives": { "type": "array", "items": { "type": "object", "properties": {
                        "index": { "type": "integer", "minimum": 1 },
                        "objective": { "type": "string", "enum": ["urgency", "reverseTriage"] }
                    } } },
                    "constraints": { "type": "array", "items": { "type": "object", "properties": {
                        "index": { "type": "integer", "minimum": 1 },
                        "kind": { "type": "string", "enum": ["lsi", "scrThreshold", "rtdThreshold", "airTime"] },
                        "k": { "type": "number" }
                    } } },
                    "selectionTheta": { "type": "number" },
                    "relaxation": { "type": "object" },
                    "sequential": { "type": "object" },
                    "pinnedSelection": { "type": "integer" },
                    "rules": { "type": "string" }
                }
            }
        } }
    })
}
