#![allow(dead_code)]

use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn corpus(rel: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "corpus", rel].iter().collect();
    p.display().to_string()
}

/// Checks `v` against one definition of the published schema.
pub fn conforms(def: &str, v: &Value) -> Result<(), String> {
    let root: Value = serde_json::from_str(lbr::service::SCHEMA).expect("schema is JSON");
    let schema = json!({ "$ref": format!("#/$defs/{def}"), "$defs": root["$defs"] });
    let validator = jsonschema::validator_for(&schema).map_err(|e| e.to_string())?;
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{e} at {}", e.instance_path)).collect();
    match errors.is_empty() {
        true => Ok(()),
        false => Err(format!("{def}: {}\n{v:#}", errors.join("; "))),
    }
}

/// The schema definition a successful response of `method uri` must meet.
fn expected(method: &Method, uri: &str) -> &'static str {
    let path = uri.split('?').next().unwrap_or(uri);
    match (method.as_str(), path.rsplit('/').next()) {
        ("POST", Some("moves" | "resign")) => "MoveResponse",
        ("GET", Some("transcript")) => "Transcript",
        _ => "SessionView",
    }
}

/// Sends one request through the router and validates the response body.
pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method.clone())
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v: Value = serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("{uri}: not JSON: {bytes:?}"));
    let def = if status.is_success() { expected(&method, uri) } else { "Error" };
    conforms(def, &v).unwrap();
    (status, v)
}

/// Reads a finished session's event stream.
pub async fn sse_events(app: &Router, id: &str) -> Vec<Value> {
    let req = Request::builder().uri(format!("/sessions/{id}/events")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    parse_sse(std::str::from_utf8(&bytes).unwrap())
}

/// The `data:` payloads of an event stream, each checked against the schema.
pub fn parse_sse(text: &str) -> Vec<Value> {
    text.lines()
        .filter_map(|l| l.strip_prefix("data:"))
        .map(|d| {
            let v: Value = serde_json::from_str(d.trim()).unwrap();
            conforms("Event", &v).unwrap();
            v
        })
        .collect()
}

/// A compact rendering of an event for comparisons.
pub fn brief(e: &Value) -> String {
    match e["kind"].as_str().unwrap() {
        "move" => format!("{} {}", e["player"].as_str().unwrap(), e["move"].to_string().trim_matches('"')),
        "atom" => format!("atom {}", if e["holds"].as_bool().unwrap() { "true" } else { "false" }),
        "learned" => {
            let atoms: Vec<String> = e["atoms"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| {
                    let args: Vec<String> = a["args"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
                    format!("({} {} {})", a["pred"].as_str().unwrap(), args.join(" "), a["witness"])
                })
                .collect();
            format!("learned {}", atoms.join(" "))
        }
        "backtrack" => format!("{} backtrack to {}", e["player"].as_str().unwrap(), e["to"]),
        "resigned" => format!("{} resigned", e["player"].as_str().unwrap()),
        "finished" => format!("{} wins", e["winner"].as_str().unwrap()),
        k => panic!("unknown event kind {k}"),
    }
}

/// What the EM1 session reports after Abelard plays `n` then `m` with
/// `m * m = n`.
pub fn em1_expected(n: u64, m: u64) -> Vec<String> {
    [
        format!("abelard {n}"),
        "eloise right".into(),
        format!("abelard {m}"),
        "atom false".into(),
        format!("learned (P {n} {m})"),
        "eloise backtrack to 1".into(),
        "eloise left".into(),
        format!("eloise {m}"),
        "atom true".into(),
        "eloise wins".into(),
    ]
    .into()
}
