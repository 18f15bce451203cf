use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use qrhl::lang::Settings;
use qrhl_cli::service::router;

const EPR: &str = include_str!("../../../examples/epr.qrhl");

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    assert_eq!(resp.headers()["content-type"], "application/json");
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

/// Declarations and the goal statement of the EPR script.
fn epr_prefix() -> String {
    EPR.lines().take_while(|l| !l.ends_with("1.")).map(|l| format!("{l}\n")).collect()
}

fn epr_tactics() -> Vec<&'static str> {
    EPR.lines().skip_while(|l| !l.ends_with("1.")).filter(|l| !l.trim().is_empty() && *l != "qed.").collect()
}

async fn open(app: &Router, script: &str) -> String {
    let (st, v) = call(app, "POST", "/session", Some(json!({ "script": script }))).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["revision"], 0);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn skip_closes_a_trivial_goal() {
    let app = router(Settings::default());
    let id = open(&app, "classical var x : bit.\nqrhl t : {Cla[x1 = x2]} { skip; } ~ { skip; } {Cla[x1 = x2]}.").await;
    let (st, v) = call(&app, "GET", &format!("/session/{id}/state"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["goals"].as_array().unwrap().len(), 1);
    assert_eq!(v["goals"][0]["kind"], "qrhl");
    let (st, v) = call(&app, "POST", &format!("/session/{id}/tactic"), Some(json!({"revision": 0, "text": "skip."}))).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["revision"], 1);
    assert_eq!(v["goals"], json!([]));
    assert_eq!(v["log"], json!(["skip."]));
}

#[tokio::test]
async fn empty_body_creates_an_empty_session() {
    let app = router(Settings::default());
    let (st, v) = call(&app, "POST", "/session", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["goals"], json!([]));
    assert_eq!(v["revision"], 0);
}

#[tokio::test]
async fn stale_revision_is_rejected() {
    let app = router(Settings::default());
    let id = open(&app, &epr_prefix()).await;
    let uri = format!("/session/{id}/tactic");
    let (st, _) = call(&app, "POST", &uri, Some(json!({"revision": 0, "text": "qapply1."}))).await;
    assert_eq!(st, StatusCode::OK);
    let (st, v) = call(&app, "POST", &uri, Some(json!({"revision": 0, "text": "qapply2."}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["revision"], 1);
    let (st, v) = call(&app, "POST", &format!("/session/{id}/undo"), Some(json!({"revision": 5}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["revision"], 1);
    let (_, v) = call(&app, "GET", &format!("/session/{id}/state"), None).await;
    assert_eq!(v["log"], json!(["qapply1."]));
}

#[tokio::test]
async fn tactic_errors_are_reported_and_leave_the_state() {
    let app = router(Settings::default());
    let id = open(&app, &epr_prefix()).await;
    let (_, before) = call(&app, "GET", &format!("/session/{id}/state"), None).await;
    for text in ["frobnicate.", "qinit1."] {
        let (st, v) = call(&app, "POST", &format!("/session/{id}/tactic"), Some(json!({"revision": 0, "text": text}))).await;
        assert_eq!(st, StatusCode::BAD_REQUEST, "{text}");
        assert!(!v["error"].as_str().unwrap().is_empty());
        assert_eq!(v["revision"], 0);
    }
    let (_, after) = call(&app, "GET", &format!("/session/{id}/state"), None).await;
    assert_eq!(before, after);
}

#[tokio::test]
async fn stepping_epr_reaches_no_goals_and_undo_restores() {
    let app = router(Settings::default());
    let id = open(&app, &epr_prefix()).await;
    let uri = format!("/session/{id}/tactic");
    let mut rev = 0;
    let mut counts = Vec::new();
    for t in epr_tactics() {
        let (st, v) = call(&app, "POST", &uri, Some(json!({"revision": rev, "text": t}))).await;
        assert_eq!(st, StatusCode::OK, "{t}: {v}");
        rev = v["revision"].as_u64().unwrap();
        counts.push(v["goals"].as_array().unwrap().len());
        if t == "qapply1." {
            let pretty = v["goals"][0]["pretty"].as_str().unwrap();
            assert!(pretty.contains("Qeq[(H ⊗ id(bit)) @ q1, r1 == q2, r2]"), "{pretty}");
        }
    }
    assert_eq!(counts.last(), Some(&0));
    assert_eq!(rev, epr_tactics().len() as u64);
    let (st, v) = call(&app, "POST", &format!("/session/{id}/undo"), Some(json!({"revision": rev}))).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["revision"], rev + 1);
    assert_eq!(v["goals"].as_array().unwrap().len(), counts[counts.len() - 2]);
}

#[tokio::test]
async fn displayed_predicates_parse_back() {
    let app = router(Settings::default());
    let id = open(&app, &epr_prefix()).await;
    let uri = format!("/session/{id}/tactic");
    let mut session = qrhl_cli::new_session(Settings::default());
    session.run(&epr_prefix()).unwrap();
    for (rev, t) in epr_tactics().into_iter().enumerate() {
        let (_, v) = call(&app, "POST", &uri, Some(json!({"revision": rev, "text": t}))).await;
        for g in v["goals"].as_array().unwrap() {
            for side in ["pre", "post", "lhs", "rhs"] {
                if let Some(p) = g["ast"].get(side) {
                    let src = p["pretty"].as_str().unwrap_or_else(|| panic!("no pretty in {p}"));
                    let ctx = &session.current.as_ref().unwrap().ctx;
                    let parsed = qrhl::predicates::parse_predicate(src, ctx, true).unwrap();
                    assert_eq!(parsed.to_string(), src);
                }
            }
        }
    }
}

#[tokio::test]
async fn unknown_session_and_malformed_requests() {
    let app = router(Settings::default());
    let (st, v) = call(&app, "GET", "/session/nope/state", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
    let (st, _) = call(&app, "POST", "/session", Some(json!({"script": "classical var : bit."}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let id = open(&app, "").await;
    let (st, _) = call(&app, "POST", &format!("/session/{id}/tactic"), Some(json!({"text": "skip."}))).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn service_and_batch_agree() {
    let app = router(Settings::default());
    let id = open(&app, &epr_prefix()).await;
    let tactics = &epr_tactics()[..3];
    for (rev, t) in tactics.iter().enumerate() {
        call(&app, "POST", &format!("/session/{id}/tactic"), Some(json!({"revision": rev, "text": t}))).await;
    }
    let (_, v) = call(&app, "GET", &format!("/session/{id}/state"), None).await;
    let mut batch = qrhl_cli::new_session(Settings::default());
    batch.run(&format!("{}{}", epr_prefix(), tactics.join("\n"))).unwrap();
    let expected: Vec<Value> = qrhl_cli::goals(&batch).iter().map(|g| g.to_json()).collect();
    assert_eq!(v["goals"], Value::from(expected));
}
