mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pir_core::model::Threshold;
use pir_db::doc::{BiListDoc, ResultDoc};
use pir_db::service::router;
use pir_db::Engine;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>, Option<String>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(v.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp.headers().get(header::CONTENT_TYPE).map(|v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes, ctype)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes, _) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn annotation() -> Value {
    serde_json::to_value(common::two_box_annotation()).unwrap()
}

fn setup() -> (Arc<Engine>, Router, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let engine = Arc::new(Engine::open(dir.path()).unwrap());
    let app = router(Arc::clone(&engine), None);
    (engine, app, dir)
}

#[tokio::test]
async fn insert_then_fetch() {
    let (engine, app, _dir) = setup();
    let (status, body) = call_json(&app, "POST", "/api/images", Some(annotation())).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = body["id"].as_str().unwrap().to_string();

    let (status, rec) = call_json(&app, "GET", &format!("/api/images/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    let stored = BiListDoc::from_bilist(&engine.snapshot().get(&id).unwrap().bilist);
    assert_eq!(serde_json::from_value::<BiListDoc>(rec["bilist"].clone()).unwrap(), stored);
    assert_eq!(rec["relations"], Value::Null);
    assert_eq!(rec["bilist"]["relations"], json!([["to", "=", "mi"]]));
    assert_eq!(rec["thumbnail_url"], json!(format!("/api/thumbnails/{id}.png")));

    let (status, bytes, ctype) = call(&app, "GET", &format!("/api/thumbnails/{id}.png"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype.as_deref(), Some("image/png"));
    let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png).unwrap();
    assert!(img.width().max(img.height()) <= 128);
}

#[tokio::test]
async fn error_statuses_and_codes() {
    let (_engine, app, _dir) = setup();
    let mut bad = annotation();
    bad["objects"][0]["polygon"] = json!([[0, 0], [1, 1]]);
    let (status, body) = call_json(&app, "POST", "/api/images", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_geometry");

    let mut dup = annotation();
    dup["objects"][1]["name"] = json!("Sky");
    let (status, body) = call_json(&app, "POST", "/api/images", Some(dup)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "validation");

    let (status, body) = call_json(&app, "POST", "/api/images", Some(json!({"objects": 3}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "malformed_document");

    let mut with_id = annotation();
    with_id["id"] = json!("mine");
    assert_eq!(call_json(&app, "POST", "/api/images", Some(with_id.clone())).await.0, StatusCode::CREATED);
    let (status, body) = call_json(&app, "POST", "/api/images", Some(with_id)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "conflict");

    let mut path_raster = annotation();
    path_raster["raster"] = json!("/etc/passwd");
    assert_eq!(call_json(&app, "POST", "/api/images", Some(path_raster)).await.0, StatusCode::BAD_REQUEST);

    for uri in ["/api/images/none", "/api/thumbnails/none.png", "/api/thumbnails/mine.jpg", "/api/nothing"] {
        let (status, body) = call_json(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(body["error"]["code"], "not_found", "{uri}");
    }

    let sketch = json!({"objects": [{"name": "sky", "polygon": [[0, 0], [1, 0], [1, 1]]}], "threshold": 101});
    let (status, body) = call_json(&app, "POST", "/api/query/sketch", Some(sketch)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "validation");
    let (status, _) = call_json(&app, "POST", "/api/query/sketch", Some(json!({"objects": [], "threshold": 10}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call_json(&app, "POST", "/api/query/by-image", Some(json!({"id": "none", "threshold": 0}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_json(&app, "GET", "/api/images?sample=x", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn queries_match_engine() {
    let (engine, app, _dir) = setup();
    let mut rng = common::rng(11);
    for _ in 0..40 {
        engine.insert_image(&common::random_annotation(&mut rng)).unwrap();
    }
    let sketch = json!({
        "objects": [
            {"name": "sky", "polygon": [[0, 10], [40, 10], [40, 20], [0, 20]]},
            {"name": "water", "polygon": [[0, 0], [40, 0], [40, 10], [0, 10]]},
            {"name": "boat", "polygon": [[5, 8], [15, 8], [15, 12], [5, 12]]}
        ],
        "threshold": 0,
        "limit": 100
    });
    let (status, body) = call_json(&app, "POST", "/api/query/sketch", Some(sketch.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let got: Vec<ResultDoc> = serde_json::from_value(body).unwrap();
    let q = serde_json::from_value::<pir_db::doc::SketchQueryDoc>(sketch).unwrap().to_query().unwrap();
    let expected = engine.query_sketch(&q);
    assert_eq!(got.len(), expected.len());
    assert!(!got.is_empty());
    for (g, e) in got.iter().zip(&expected) {
        assert_eq!((&g.id, g.similarity, &g.matched), (&e.id, e.similarity, &e.matched));
        assert_eq!(g.thumbnail_url, format!("/api/thumbnails/{}.png", e.id));
    }
    let keyword = engine.snapshot().candidates(["sky", "water", "boat"]);
    assert_eq!(got.iter().map(|r| r.id.clone()).collect::<std::collections::BTreeSet<_>>(), keyword);

    let id = got[got.len() / 2].id.clone();
    let (status, body) = call_json(&app, "POST", "/api/query/by-image", Some(json!({"id": id, "threshold": 0}))).await;
    assert_eq!(status, StatusCode::OK);
    let by_image: Vec<ResultDoc> = serde_json::from_value(body).unwrap();
    assert_eq!(by_image[0].similarity, 100.0);
    let expected = engine.query_by_image(&id, Threshold::MIN, false, None).unwrap();
    assert_eq!(by_image.iter().map(|r| &r.id).collect::<Vec<_>>(), expected.iter().map(|r| &r.id).collect::<Vec<_>>());

    let (_, body) = call_json(&app, "POST", "/api/query/by-image", Some(json!({"id": id, "threshold": 0, "limit": 1}))).await;
    assert_eq!(body.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn invariant_query_finds_rotated_copy() {
    let (_engine, app, _dir) = setup();
    let stored = json!({"original_url": "x", "objects": [
        {"name": "sun", "polygon": [[0, 0], [2, 0], [2, 2], [0, 2]]},
        {"name": "hill", "polygon": [[5, 0], [9, 0], [9, 1], [5, 1]]}
    ]});
    call_json(&app, "POST", "/api/images", Some(stored)).await;
    // Same scene turned a quarter turn counter-clockwise.
    let rotated = |invariant: bool| json!({"objects": [
        {"name": "sun", "polygon": [[-2, 0], [0, 0], [0, 2], [-2, 2]]},
        {"name": "hill", "polygon": [[-1, 5], [0, 5], [0, 9], [-1, 9]]}
    ], "threshold": 0, "invariant": invariant});
    let (_, plain) = call_json(&app, "POST", "/api/query/sketch", Some(rotated(false))).await;
    assert!(plain[0]["similarity"].as_f64().unwrap() < 100.0);
    let (_, inv) = call_json(&app, "POST", "/api/query/sketch", Some(rotated(true))).await;
    assert_eq!(inv[0]["similarity"].as_f64().unwrap(), 100.0);
}

#[tokio::test]
async fn sampling() {
    let (engine, app, _dir) = setup();
    let mut rng = common::rng(12);
    for _ in 0..10 {
        engine.insert_image(&common::random_annotation(&mut rng)).unwrap();
    }
    let (status, body) = call_json(&app, "GET", "/api/images?sample=4", None).await;
    assert_eq!(status, StatusCode::OK);
    let ids: std::collections::BTreeSet<&str> = body.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), 4);
    let (_, all) = call_json(&app, "GET", "/api/images", None).await;
    assert_eq!(all.as_array().unwrap().len(), 10);
    let (_, a) = call_json(&app, "GET", "/api/images?sample=3&seed=9", None).await;
    let (_, b) = call_json(&app, "GET", "/api/images?sample=3&seed=9", None).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn concurrent_inserts_linearise() {
    let (engine, app, _dir) = setup();
    let mut handles = Vec::new();
    for _ in 0..16 {
        let app = app.clone();
        handles.push(tokio::spawn(async move { call_json(&app, "POST", "/api/images", Some(annotation())).await }));
    }
    let mut ids = std::collections::BTreeSet::new();
    for h in handles {
        let (status, body) = h.await.unwrap();
        assert_eq!(status, StatusCode::CREATED);
        ids.insert(body["id"].as_str().unwrap().to_string());
    }
    assert_eq!(ids.len(), 16);
    assert_eq!(engine.snapshot().len(), 16);
}

#[tokio::test]
async fn static_ui_is_served() {
    let dir = tempfile::tempdir().unwrap();
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<h1>sketch</h1>").unwrap();
    let app = router(Arc::new(Engine::open(dir.path()).unwrap()), Some(ui.path().to_path_buf()));
    let (status, body, _) = call(&app, "GET", "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<h1>sketch</h1>");
    assert_eq!(call(&app, "GET", "/api/images", None).await.0, StatusCode::OK);
}
