use std::path::Path;
use std::process::Command;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn distmodes(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_distmodes"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "distmodes {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

async fn call(app: &axum::Router, method: Method, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(status, StatusCode::OK, "{v}");
    v
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    distmodes(d, &["generate", "atom", "--n", "40", "--seed", "2", "--out", "atom.csv"]);
    let csv = std::fs::read_to_string(d.join("atom.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
    assert!(csv.starts_with("x,y,z,label"));

    let df = distmodes(d, &["distances", "--data", "atom.csv", "--metric", "euclidean"]);
    assert_eq!(df.lines().count(), 1 + 40 * 39 / 2);

    distmodes(
        d,
        &["scan", "--data", "atom.csv", "--metrics", "euclidean,chebyshev", "--n-boot", "100", "--choose", "euclidean", "--out", "scan.json"],
    );
    assert_eq!(read_json(&d.join("scan.json"))["schema"], 1);
    let session = read_json(&d.join("session.json"));
    assert_eq!(session["metric"], "euclidean");

    let fit = distmodes(d, &["fit", "--components", "2", "--seed", "1"]);
    let fit: Value = serde_json::from_str(&fit).unwrap();
    assert!(fit["bd"].is_f64());

    std::fs::write(d.join("params.json"), r#"{"weights": [0.5, 0.5], "means": [0.0, 2.0], "sds": [1.0, 1.0]}"#).unwrap();
    let b: Value = serde_json::from_str(&distmodes(d, &["boundaries", "--params", "params.json"])).unwrap();
    assert!((b["boundaries"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let labels: String = (0..40).map(|i| if i < 20 { "1\n" } else { "2\n" }).collect();
    std::fs::write(d.join("truth.txt"), labels).unwrap();
    let eval = distmodes(d, &["evaluate", "--labels", "truth.txt", "--hierarchical", "ward:2", "--kmeans", "2"]);
    let eval: Value = serde_json::from_str(&eval).unwrap();
    let names: Vec<&str> = eval["evaluations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(names[0], "truth");
    assert_eq!(names.len(), 3);

    let table = distmodes(d, &["table1", "--seeds", "2", "--shifts", "0.3", "--n-per-cluster", "20", "--n-boot", "100"]);
    assert!(table.contains("0.30"), "{table}");

    let failed = Command::new(env!("CARGO_BIN_EXE_distmodes"))
        .current_dir(d)
        .args(["fit", "--session", "missing.json"])
        .output()
        .unwrap();
    assert!(!failed.status.success());
}

#[tokio::test(flavor = "multi_thread")]
async fn cli_and_server_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    distmodes(d, &["generate", "two-gaussians", "--n", "30", "--shift", "0.4", "--seed", "5", "--out", "two.csv"]);
    distmodes(
        d,
        &["scan", "--data", "two.csv", "--metrics", "euclidean,manhattan,chord", "--n-boot", "100", "--seed", "7", "--session", "s.json", "--out", "scan.json"],
    );
    distmodes(d, &["fit", "--session", "s.json", "--metric", "manhattan", "--components", "2", "--seed", "3", "--out", "fit.json"]);
    std::fs::write(d.join("params.json"), r#"{"weights": [0.4, 0.6], "means": [0.2, 0.7], "sds": [0.1, 0.2]}"#).unwrap();
    distmodes(d, &["boundaries", "--session", "s.json", "--params", "params.json", "--out", "edit.json"]);
    distmodes(d, &["evaluate", "--session", "s.json", "--hierarchical", "average:2", "--kmeans", "2", "--seed", "4", "--out", "eval.json"]);

    let sessions = tempfile::tempdir().unwrap();
    let app = distmodes_server::router(distmodes_server::AppState::new(sessions.path()).unwrap());
    let csv = std::fs::read_to_string(d.join("two.csv")).unwrap();
    let scan = call(
        &app,
        Method::POST,
        "/scan?session=s",
        json!({
            "dataset": {"name": "two", "csv": csv, "label_column": "label"},
            "metrics": ["euclidean", "manhattan", "chord"],
            "n_boot": 100,
            "seed": 7
        }),
    )
    .await;
    assert_eq!(scan, read_json(&d.join("scan.json")));

    let fit = call(&app, Method::POST, "/gmm/fit?session=s", json!({"metric": "manhattan", "components": 2, "seed": 3})).await;
    assert_eq!(fit, read_json(&d.join("fit.json")));

    let edit = call(
        &app,
        Method::PUT,
        "/gmm/params?session=s",
        json!({"weights": [0.4, 0.6], "means": [0.2, 0.7], "sds": [0.1, 0.2]}),
    )
    .await;
    assert_eq!(edit, read_json(&d.join("edit.json")));

    let eval = call(
        &app,
        Method::POST,
        "/evaluate?session=s",
        json!({"partitions": [
            {"method": "hierarchical", "linkage": "average", "k": 2},
            {"method": "kmeans", "k": 2, "seed": 4}
        ]}),
    )
    .await;
    assert_eq!(eval, read_json(&d.join("eval.json")));

    // the persisted sessions match apart from the id
    let mut cli_session = read_json(&d.join("s.json"));
    let mut server_session = read_json(&sessions.path().join("s.json"));
    cli_session["id"] = Value::Null;
    server_session["id"] = Value::Null;
    assert_eq!(cli_session, server_session);
}
