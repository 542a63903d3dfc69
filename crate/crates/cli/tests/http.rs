use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use isf_cli::server::router;
use isf_core::pipeline::{build_crawl_index, Pipeline, PipelineConfig};
use serde_json::Value;
use tower::ServiceExt;

fn app() -> (tempfile::TempDir, Arc<Pipeline>, Router) {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::load(&fixtures.join("isf.toml")).unwrap();
    cfg.index = dir.path().join("index.jsonl");
    cfg.profiles = dir.path().join("profiles");
    build_crawl_index(&fixtures.join("corpus/rdb.jsonl"), &cfg.index).unwrap();
    let p = Arc::new(Pipeline::from_config(cfg).unwrap());
    let r = router(p.clone(), None);
    (dir, p, r)
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, String) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(body.to_vec()).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, String) {
    call(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, String) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    call(app, req).await
}

#[tokio::test]
async fn health_is_ok() {
    let (_d, _p, app) = app();
    assert_eq!(get(&app, "/health").await, (StatusCode::OK, "ok".to_string()));
}

#[tokio::test]
async fn search_returns_entries() {
    let (_d, _p, app) = app();
    let (s, body) = get(&app, "/search?q=jaguar&k=5").await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert!(!entries.is_empty() && entries.len() <= 5);
    for e in entries {
        for f in ["url", "title", "snippet", "score", "category", "source", "backend"] {
            assert!(e.get(f).is_some(), "missing {f}");
        }
    }
    assert!(v["facets"].is_object());
}

#[tokio::test]
async fn bad_requests_name_the_field() {
    let (_d, _p, app) = app();
    for (uri, field) in [
        ("/search", "q"),
        ("/search?q=%20", "q"),
        ("/search?q=jaguar&cats=Top/Nope", "cats"),
        ("/search?q=jaguar&sources=ftp", "sources"),
        ("/search?q=jaguar&k=0", "k"),
        ("/profile", "user"),
    ] {
        let (s, body) = get(&app, uri).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{uri}");
        let v: Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["field"], field, "{uri}");
        assert!(v["error"].as_str().unwrap().len() > 3);
    }
}

#[tokio::test]
async fn category_selection_filters() {
    let (_d, _p, app) = app();
    let (s, body) = get(&app, "/search?q=jaguar&cats=Top/Science").await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        let in_sel = |c: &Value| c.as_str().is_some_and(|c| c.starts_with("Top/Science"));
        assert!(in_sel(&e["category"]) || in_sel(&e["secondary"]));
    }
}

#[tokio::test]
async fn categories_tree() {
    let (_d, _p, app) = app();
    let (s, body) = get(&app, "/categories").await;
    assert_eq!(s, StatusCode::OK);
    assert!(body.contains("Top/Science/Biology/Zoology"));
}

#[tokio::test]
async fn visit_flow_increments_profile() {
    let (_d, p, app) = app();
    let (_, body) = get(&app, "/search?q=jaguar&k=10").await;
    let v: Value = serde_json::from_str(&body).unwrap();
    let entry = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["category"].as_str().unwrap().starts_with("Top/Science/Biology"))
        .expect("a biology result")
        .clone();
    let url = entry["url"].as_str().unwrap();

    // Unknown user gets a fresh profile.
    let (s, _) = post(&app, "/visit", serde_json::json!({"user": "zed", "url": url})).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    let (s, _) = post(&app, "/visit", serde_json::json!({"user": "zed", "url": url})).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    assert_eq!(p.profiles().get("zed").unwrap().unwrap().weight("Top/Science/Biology"), 2);

    let (s, body) = get(&app, "/profile?user=zed").await;
    assert_eq!(s, StatusCode::OK);
    let prof: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(prof["weights"]["Top/Science/Biology"], 2);

    let (s, _) = post(&app, "/visit", serde_json::json!({"user": "zed", "url": "http://never.example/"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn profile_init_and_validation() {
    let (_d, _p, app) = app();
    let (s, body) = post(
        &app,
        "/profile",
        serde_json::json!({"user": "ann", "topics": {"Top/Science/Biology": 3, "Top/Sports/Motorsports": 0}}),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["weights"]["Top/Science/Biology"], 3);

    let (s, body) = post(&app, "/profile", serde_json::json!({"user": "ann", "topics": {"Top/Nope": 1}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(body.contains("topics"));
    let (s, _) = post(&app, "/profile", serde_json::json!({"user": "ann", "topics": {"Top/Science/Biology": -1}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = post(&app, "/profile", serde_json::json!({"user": "../x", "topics": {}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn searches_run_during_profile_updates() {
    let (_d, p, app) = app();
    let (_, body) = get(&app, "/search?q=jaguar&k=10").await;
    let v: Value = serde_json::from_str(&body).unwrap();
    let url = v["entries"][0]["url"].as_str().unwrap().to_string();

    let mut tasks = Vec::new();
    for i in 0..20 {
        let app = app.clone();
        let url = url.clone();
        tasks.push(tokio::spawn(async move {
            if i % 2 == 0 {
                let (s, _) = post(&app, "/visit", serde_json::json!({"user": "multi", "url": url})).await;
                assert_eq!(s, StatusCode::NO_CONTENT);
            } else {
                let (s, _) = get(&app, "/search?q=jaguar&user=multi").await;
                assert_eq!(s, StatusCode::OK);
            }
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    let prof = p.profiles().get("multi").unwrap().unwrap();
    assert_eq!(prof.weights.values().max().copied(), Some(10));
}
