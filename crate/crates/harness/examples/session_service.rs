//! Drives one 4-trial session through the HTTP service in process and prints
//! every payload a subject-facing client would see. Pass `--serve` to keep
//! the service listening on 127.0.0.1:8080 afterwards.
//!
//! ```bash
//! cargo run --release -p gts-harness --example session_service [-- --serve]
//! ```

use axum::body::Body;
use axum::http::Request;
use gts_core::protocol::{Kind, Stimulus};
use gts_core::render::{presets, render, RenderConfig};
use gts_harness::manifest::StimulusManifest;
use gts_harness::service::{router, serve, AppState, ServiceConfig};
use http_body_util::BodyExt;
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: &str) -> String {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8_lossy(&bytes).into_owned();
    println!("{method:<4} {uri}\n     {status} {text}");
    text
}

#[tokio::main]
async fn main() {
    let dir = tempfile::tempdir().unwrap();
    let scene = presets::cornell_box();
    let camera = presets::cornell_camera(48, 48);
    for (name, spp) in [("converged.png", 256), ("noisy.png", 4)] {
        render(&scene, &camera, &RenderConfig::new(spp, 8, 5)).unwrap().image.save(&dir.path().join(name)).unwrap();
    }
    let manifest = StimulusManifest::new(
        ".",
        vec![
            Stimulus {
                id: "converged".into(),
                kind: Kind::Real,
                image_path: "converged.png".into(),
                provenance: "256 spp".into(),
            },
            Stimulus {
                id: "noisy".into(),
                kind: Kind::Synthetic,
                image_path: "noisy.png".into(),
                provenance: "4 spp".into(),
            },
        ],
    );
    let manifest_path = dir.path().join("manifest.toml");
    std::fs::write(&manifest_path, manifest.to_toml()).unwrap();
    let config = ServiceConfig::new(&manifest_path, dir.path().join("logs"));

    let app = router(AppState::new(config.clone()).unwrap());
    let created: serde_json::Value =
        serde_json::from_str(&call(&app, "POST", "/api/session", r#"{"n": 4}"#).await).unwrap();
    let id = created["session_id"].as_str().unwrap();
    for k in 0..4 {
        call(&app, "GET", &format!("/api/session/{id}/trial/{k}"), "").await;
        let choice = if k % 2 == 0 { "real" } else { "synthetic" };
        call(&app, "POST", &format!("/api/session/{id}/trial/{k}/response"), &format!(r#"{{"choice": "{choice}"}}"#))
            .await;
    }
    call(&app, "GET", &format!("/api/session/{id}/result"), "").await;
    println!("\nlog:\n{}", std::fs::read_to_string(dir.path().join("logs/sessions.jsonl")).unwrap());

    if std::env::args().any(|a| a == "--serve") {
        serve(config).await.unwrap();
    }
}
