mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use gts_harness::log::{read_log, replay, LOG_FILE_NAME};
use gts_harness::service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    _dir: tempfile::TempDir,
    config: ServiceConfig,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::manifest_dir(dir.path());
    let config = ServiceConfig::new(manifest, dir.path().join("logs"));
    Fixture { _dir: dir, config }
}

fn app(config: &ServiceConfig) -> Router {
    router(AppState::new(config.clone()).unwrap())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

async fn create(app: &Router, n: usize) -> String {
    let (s, v) = call_json(app, "POST", "/api/session", Some(&json!({ "n": n }).to_string())).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    assert_eq!(v["n"], n);
    v["session_id"].as_str().unwrap().to_string()
}

async fn answer(app: &Router, id: &str, k: usize, choice: &str) -> (StatusCode, Value) {
    call_json(
        app,
        "POST",
        &format!("/api/session/{id}/trial/{k}/response"),
        Some(&json!({ "choice": choice }).to_string()),
    )
    .await
}

#[tokio::test]
async fn two_trial_session_happy_path() {
    let f = fixture();
    let app = app(&f.config);
    let id = create(&app, 2).await;
    for k in 0..2 {
        let (s, v) = call_json(&app, "GET", &format!("/api/session/{id}/trial/{k}"), None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["trial_index"], k);
        let url = v["image_url"].as_str().unwrap();
        let (s, bytes) = call(&app, "GET", url, None).await;
        assert_eq!(s, StatusCode::OK);
        assert!(bytes.starts_with(b"P6"));
        let (s, v) = answer(&app, &id, k, "real").await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["accepted"], true);
        assert_eq!(v["complete"], k == 1);
    }
    let (s, v) = call_json(&app, "GET", &format!("/api/session/{id}/result"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["n"], 2);
    assert_eq!(v["alpha"], 0.05);
    assert!(v["verdict"] == "PASSED" || v["verdict"] == "FAILED");
    assert!(v["caveat"].as_str().unwrap().contains("absence of evidence of discrimination at alpha"));
}

#[tokio::test]
async fn default_n_applies_to_empty_body() {
    let mut f = fixture();
    f.config.default_n = 5;
    let app = app(&f.config);
    let (s, v) = call_json(&app, "POST", "/api/session", None).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["n"], 5);
    let (s, v) = call_json(&app, "POST", "/api/session", Some("{}")).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["n"], 5);
}

#[tokio::test]
async fn error_statuses() {
    let f = fixture();
    let app = app(&f.config);
    let id = create(&app, 3).await;

    let (s, _) = call_json(&app, "GET", &format!("/api/session/{id}/result"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call_json(&app, "GET", "/api/session/nope/trial/0", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call_json(&app, "GET", "/api/session/nope/result", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = answer(&app, "nope", 0, "real").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    for k in ["3", "-1", "x"] {
        let (s, _) = call_json(&app, "GET", &format!("/api/session/{id}/trial/{k}"), None).await;
        assert_eq!(s, StatusCode::NOT_FOUND, "trial {k}");
    }

    for body in ["", "{", "[]", r#"{"choice":"maybe"}"#, r#"{"choice":"real","extra":1}"#] {
        let (s, v) = call_json(&app, "POST", &format!("/api/session/{id}/trial/0/response"), Some(body)).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{body:?}");
        assert!(v["error"].is_string());
    }
    for body in ["{", r#"{"n":0}"#, r#"{"n":-2}"#, r#"{"n":"four"}"#, r#"{"trials":4}"#] {
        let (s, _) = call_json(&app, "POST", "/api/session", Some(body)).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{body:?}");
    }

    assert_eq!(answer(&app, &id, 0, "real").await.0, StatusCode::OK);
    assert_eq!(answer(&app, &id, 0, "synthetic").await.0, StatusCode::CONFLICT);
    assert_eq!(answer(&app, &id, 1, "real").await.0, StatusCode::OK);
    assert_eq!(answer(&app, &id, 2, "real").await.0, StatusCode::OK);
    assert_eq!(answer(&app, &id, 2, "real").await.0, StatusCode::CONFLICT);
    let (s, v) = call_json(&app, "GET", &format!("/api/session/{id}/result"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["n"], 3);
}

#[tokio::test]
async fn nothing_subject_facing_reveals_labels_before_completion() {
    let f = fixture();
    let app = app(&f.config);
    let n = 12;
    let id = create(&app, n).await;
    let mut payloads: Vec<(String, Vec<u8>)> = Vec::new();
    for k in 0..n {
        let status_uri = format!("/api/session/{id}");
        payloads.push((status_uri.clone(), call(&app, "GET", &status_uri, None).await.1));
        let trial_uri = format!("/api/session/{id}/trial/{k}");
        let (_, body) = call(&app, "GET", &trial_uri, None).await;
        let v: Value = serde_json::from_slice(&body).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["image_url", "n", "trial_index"]);
        payloads.push((trial_uri, body));
        let choice = if k % 2 == 0 { "real" } else { "synthetic" };
        let uri = format!("/api/session/{id}/trial/{k}/response");
        let (_, body) = call(&app, "POST", &uri, Some(&json!({ "choice": choice }).to_string())).await;
        payloads.push((uri, body));
        if k + 1 < n {
            let uri = format!("/api/session/{id}/result");
            payloads.push((uri.clone(), call(&app, "GET", &uri, None).await.1));
        }
    }
    for (uri, body) in &payloads {
        let text = String::from_utf8_lossy(body).to_ascii_lowercase();
        for needle in ["kind", "real", "synthetic", "zz-", "photo", "label", "stimulus"] {
            assert!(!text.contains(needle), "{uri} leaked {needle:?}: {text}");
        }
    }
    // Image URLs name the trial, never the stimulus, and differ per trial.
    let urls: std::collections::HashSet<String> =
        (0..n).map(|k| format!("/api/session/{id}/trial/{k}/image")).collect();
    assert_eq!(urls.len(), n);
}

#[tokio::test]
async fn restart_resumes_from_the_log() {
    let f = fixture();
    let before = app(&f.config);
    let id = create(&before, 6).await;
    let other = create(&before, 2).await;
    for k in [0, 2, 3] {
        assert_eq!(answer(&before, &id, k, if k == 2 { "synthetic" } else { "real" }).await.0, StatusCode::OK);
    }
    let status = format!("/api/session/{id}");
    let snapshot = call(&before, "GET", &status, None).await.1;
    let trial_urls: Vec<Vec<u8>> = {
        let mut v = Vec::new();
        for k in 0..6 {
            v.push(call(&before, "GET", &format!("/api/session/{id}/trial/{k}"), None).await.1);
        }
        v
    };
    let images: Vec<Vec<u8>> = {
        let mut v = Vec::new();
        for k in 0..6 {
            v.push(call(&before, "GET", &format!("/api/session/{id}/trial/{k}/image"), None).await.1);
        }
        v
    };
    drop(before);

    let after = app(&f.config);
    assert_eq!(call(&after, "GET", &status, None).await.1, snapshot);
    let v: Value = serde_json::from_slice(&snapshot).unwrap();
    assert_eq!(v["answered"], 3);
    assert_eq!(v["next_trial"], 1);
    for k in 0..6 {
        assert_eq!(call(&after, "GET", &format!("/api/session/{id}/trial/{k}"), None).await.1, trial_urls[k]);
        assert_eq!(call(&after, "GET", &format!("/api/session/{id}/trial/{k}/image"), None).await.1, images[k]);
    }
    assert_eq!(answer(&after, &id, 0, "real").await.0, StatusCode::CONFLICT);
    for k in [1, 4, 5] {
        assert_eq!(answer(&after, &id, k, "synthetic").await.0, StatusCode::OK);
    }
    let live = call(&after, "GET", &format!("/api/session/{id}/result"), None).await.1;
    drop(after);

    // A third process sees the same bytes, and so does a replay of the file.
    let again = app(&f.config);
    assert_eq!(call(&again, "GET", &format!("/api/session/{id}/result"), None).await.1, live);
    assert_eq!(call_json(&again, "GET", &format!("/api/session/{other}"), None).await.1["answered"], 0);
    let sessions = replay(&read_log(&f.config.log_dir.join(LOG_FILE_NAME)).unwrap()).unwrap();
    let s = sessions.iter().find(|s| s.id() == id).unwrap();
    let replayed = s.result().unwrap();
    assert_eq!(s.logged_result.as_ref(), Some(&replayed));
    let live: Value = serde_json::from_slice(&live).unwrap();
    assert_eq!(live["k_correct"], replayed.k_correct);
    assert_eq!(live["p_value"], replayed.p_value);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn simultaneous_duplicates_accept_exactly_one() {
    let f = fixture();
    let app = app(&f.config);
    let id = create(&app, 2).await;
    let tasks: Vec<_> = (0..16)
        .map(|i| {
            let app = app.clone();
            let id = id.clone();
            tokio::spawn(async move { answer(&app, &id, 1, if i % 2 == 0 { "real" } else { "synthetic" }).await.0 })
        })
        .collect();
    let mut ok = 0;
    for t in tasks {
        match t.await.unwrap() {
            StatusCode::OK => ok += 1,
            StatusCode::CONFLICT => {}
            other => panic!("unexpected {other}"),
        }
    }
    assert_eq!(ok, 1);
    let records = read_log(&f.config.log_dir.join(LOG_FILE_NAME)).unwrap();
    assert_eq!(records.len(), 2, "one plan and one response");
}

#[tokio::test]
async fn bernoulli_design_is_logged() {
    let mut f = fixture();
    f.config.design = gts_core::protocol::Design::Bernoulli;
    let app = app(&f.config);
    create(&app, 3).await;
    let records = read_log(&f.config.log_dir.join(LOG_FILE_NAME)).unwrap();
    let s = replay(&records).unwrap();
    assert_eq!(s[0].session.plan.design, gts_core::protocol::Design::Bernoulli);
}

#[tokio::test]
async fn presets_and_admin_list() {
    let f = fixture();
    let app = app(&f.config);
    let (s, v) = call_json(&app, "GET", "/api/presets", None).await;
    assert_eq!(s, StatusCode::OK);
    let names: Vec<&str> = v["archetype"].as_array().unwrap().iter().map(|a| a["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"BlueGeneL"));

    let (_, v) = call_json(&app, "GET", "/api/sessions", None).await;
    assert_eq!(v, json!([]));
    let id = create(&app, 1).await;
    let (_, v) = call_json(&app, "GET", "/api/sessions", None).await;
    assert_eq!(v[0]["status"], "open");
    assert!(v[0].get("result").is_none());
    answer(&app, &id, 0, "real").await;
    let (_, v) = call_json(&app, "GET", "/api/sessions", None).await;
    assert_eq!(v[0]["status"], "complete");
    assert_eq!(v[0]["result"]["n"], 1);
}

#[tokio::test]
async fn static_ui_is_served() {
    let mut f = fixture();
    let ui = f._dir.path().join("ui");
    std::fs::create_dir_all(&ui).unwrap();
    std::fs::write(ui.join("index.html"), "<h1>hello</h1>").unwrap();
    f.config.ui_dir = Some(ui);
    let app = app(&f.config);
    let (s, body) = call(&app, "GET", "/index.html", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body, b"<h1>hello</h1>");
    assert_eq!(call(&app, "GET", "/", None).await.1, b"<h1>hello</h1>");
}

#[test]
fn bad_manifests_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::manifest_dir(dir.path());
    let text = std::fs::read_to_string(&manifest).unwrap();
    let cases = [
        text.replace("zz-cg-id", "zz-photo-id"),
        text.replace("zz-cg-file.ppm\"", "missing.ppm\""),
        text.replace("format_version = 1", "format_version = 9"),
        text.replace("kind = \"synthetic\"", "kind = \"real\""),
    ];
    for bad in cases {
        std::fs::write(&manifest, &bad).unwrap();
        let config = ServiceConfig::new(&manifest, dir.path().join("logs"));
        assert!(AppState::new(config).is_err(), "{bad}");
    }
}
