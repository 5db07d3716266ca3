use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use abt_edit::language::LETLANG;
use abt_edit::service::{router, Store};

struct Client {
    app: axum::Router,
}

impl Client {
    fn new() -> Self {
        Client {
            app: router(Arc::new(Store::new())),
        }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
            .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, Some(body)).await
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, None).await
    }

    async fn session(&self, root: &str) -> String {
        let (status, v) = self.post("/sessions", json!({ "spec": LETLANG, "rootSort": root })).await;
        assert_eq!(status, StatusCode::OK, "{v}");
        v["id"].as_str().unwrap().to_owned()
    }
}

#[tokio::test]
async fn create_sessions() {
    let c = Client::new();
    let (status, v) = c.post("/sessions", json!({ "spec": LETLANG, "rootSort": "s" })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["text"], "(cursor (hole s))");
    assert_eq!(v["tree"], json!({ "node": "hole_s", "kind": "hole", "children": [], "cursor": true, "sort": "s" }));
    let (_, v) = c.post("/sessions", json!({ "spec": LETLANG, "rootSort": "e" })).await;
    assert_eq!(v["text"], "(cursor (hole e))");
    let (status, v) = c.post("/sessions", json!({ "spec": LETLANG, "rootSort": "q" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains('q'));
    let (status, _) = c.post("/sessions", json!({ "spec": "sort s\nop f (q) s", "rootSort": "s" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = c.get("/sessions/999").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn commands_update_the_tree_and_palette() {
    let c = Client::new();
    let id = c.session("e").await;
    let (status, v) = c.post(&format!("/sessions/{id}/command"), json!({ "kind": "insert", "arg": "plus" })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["text"], "(cursor (op plus (hole e) (hole e)))");
    assert!(v.get("stuck").is_none());
    let palette = v["palette"].as_array().unwrap();
    assert_eq!(palette.len(), 2);
    for entry in palette {
        assert_eq!(entry["sort"], "e");
        assert_eq!(entry["operators"], json!(["plus", "num", "var", "hole_e"]));
    }

    let (_, v) = c.post(&format!("/sessions/{id}/command"), json!({ "kind": "insert", "arg": "let" })).await;
    assert_eq!(v["stuck"]["reason"], "sort-mismatch");
    assert_eq!(v["text"], "(cursor (op plus (hole e) (hole e)))");

    let (_, v) = c.post(&format!("/sessions/{id}/command"), json!({ "kind": "parent" })).await;
    assert_eq!(v["stuck"]["reason"], "at-root");

    let (_, v) = c.post(&format!("/sessions/{id}/command"), json!({ "kind": "child", "arg": 2 })).await;
    assert_eq!(v["cursorPath"], json!([1]));
    let (_, v) = c.post(&format!("/sessions/{id}/command"), json!({ "kind": "insert", "arg": "num:4" })).await;
    assert_eq!(v["text"], "(op plus (hole e) (cursor (op num 4)))");
    assert_eq!(v["tree"]["children"][1]["literal"], 4);

    let (status, _) = c.post(&format!("/sessions/{id}/command"), json!({ "kind": "jump" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, trace) = c.get(&format!("/sessions/{id}/trace")).await;
    let labels: Vec<&str> = trace.as_array().unwrap().iter().map(|s| s["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["init", "{plus}", "child 2", "{num:4}"]);
}

#[tokio::test]
async fn scripts_commit_only_on_termination() {
    let c = Client::new();
    let id = c.session("e").await;
    let uri = format!("/sessions/{id}/script");

    let (_, v) = c.post(&uri, json!({ "text": "@hole_e => {plus}.nil | nil", "fuel": 10 })).await;
    assert_eq!(v["run"]["outcome"], "terminal");
    assert_eq!(v["run"]["steps"], 2);
    assert_eq!(v["session"]["text"], "(cursor (op plus (hole e) (hole e)))");

    let (_, v) = c.post(&uri, json!({ "text": "child 1. {num:1}. parent. parent. nil" })).await;
    assert_eq!(v["run"]["outcome"], "stuck");
    assert_eq!(v["run"]["stuck"]["reason"], "at-root");
    assert_eq!(v["run"]["trace"].as_array().unwrap().len(), 3);
    assert_eq!(v["session"]["text"], "(cursor (op plus (hole e) (hole e)))");

    let (_, v) = c.post(&uri, json!({ "text": "child 1. nil", "fuel": 0 })).await;
    assert_eq!(v["run"]["outcome"], "fuel-exhausted");
    assert_eq!(v["session"]["text"], "(cursor (op plus (hole e) (hole e)))");

    let (status, v) = c.post(&uri, json!({ "text": "child 1 nil" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn queries_look_under_the_cursor() {
    let c = Client::new();
    let id = c.session("e").await;
    let uri = format!("/sessions/{id}/query");
    assert_eq!(c.post(&uri, json!({ "phi": "@hole_e" })).await.1["value"], true);
    assert_eq!(c.post(&uri, json!({ "phi": "!@hole_e" })).await.1["value"], false);
    c.post(&format!("/sessions/{id}/command"), json!({ "kind": "insert", "arg": "plus" })).await;
    assert_eq!(c.post(&uri, json!({ "phi": "<>plus" })).await.1["value"], true);
    assert_eq!(c.post(&uri, json!({ "phi": "[]hole_e" })).await.1["value"], true);
    let (status, _) = c.post(&uri, json!({ "phi": "@nothing" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn palette_entries_match_what_the_service_accepts() {
    let c = Client::new();
    let id = c.session("s").await;
    for (kind, arg) in [("insert", json!("let")), ("child", json!(2)), ("insert", json!("exp"))] {
        c.post(&format!("/sessions/{id}/command"), json!({ "kind": kind, "arg": arg })).await;
    }
    let (_, view) = c.get(&format!("/sessions/{id}")).await;
    let all = ["let", "exp", "hole_s", "plus", "num:0", "var:x1", "hole_e"];
    for entry in view["palette"].as_array().unwrap() {
        let allowed: Vec<&str> = entry["operators"].as_array().unwrap().iter().map(|o| o.as_str().unwrap()).collect();
        for op in all {
            let fresh = c.session("s").await;
            // Rebuild the same tree, move onto the hole, try the insert.
            let (_, built) = c
                .post(&format!("/sessions/{fresh}/script"), json!({ "text": "{let}. child 2. {exp}. parent. nil" }))
                .await;
            assert_eq!(built["run"]["outcome"], "terminal");
            let path: Vec<u64> = entry["path"].as_array().unwrap().iter().map(|p| p.as_u64().unwrap()).collect();
            for i in &path {
                c.post(&format!("/sessions/{fresh}/command"), json!({ "kind": "child", "arg": i + 1 })).await;
            }
            let (_, v) = c.post(&format!("/sessions/{fresh}/command"), json!({ "kind": "insert", "arg": op })).await;
            let name = op.split(':').next().unwrap();
            if allowed.contains(&name) && name != "var" {
                assert!(v.get("stuck").is_none(), "{op} at {path:?}: {v}");
            } else if !allowed.contains(&name) {
                assert_eq!(v["stuck"]["reason"], "sort-mismatch", "{op} at {path:?}");
            }
        }
    }
}
