//! JSON session service.
//!
//! Every session carries a revision that grows by one with each accepted
//! mutation. Writers must quote the revision they last saw; a mismatch is
//! answered with 409. Tactics run on a copy of the session outside the
//! lock, so reads are never held up by a long step.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use qrhl::lang::Settings;
use qrhl::prover::{Goal, Session};

use crate::new_session;

struct Entry {
    revision: u64,
    session: Session,
}

#[derive(Default)]
struct Sessions {
    map: Mutex<HashMap<String, Arc<Mutex<Entry>>>>,
    next: AtomicU64,
}

#[derive(Clone)]
pub struct AppState {
    settings: Settings,
    sessions: Arc<Sessions>,
}

impl AppState {
    pub fn new(settings: Settings) -> Self {
        AppState { settings, sessions: Arc::default() }
    }

    fn get(&self, id: &str) -> Option<Arc<Mutex<Entry>>> {
        lock(&self.sessions.map).get(id).cloned()
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn router(settings: Settings) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/:id/state", get(state))
        .route("/session/:id/tactic", post(tactic))
        .route("/session/:id/undo", post(undo))
        .with_state(AppState::new(settings))
}

/// The state document of a session.
pub fn state_json(id: &str, revision: u64, s: &Session) -> Value {
    let (name, goals, log) = match &s.current {
        Some(p) => (Some(p.name.clone()), p.goals.iter().map(Goal::to_json).collect(), p.log.clone()),
        None => (None, Vec::new(), Vec::new()),
    };
    json!({
        "id": id,
        "revision": revision,
        "proof": name,
        "goals": goals,
        "log": log,
        "reports": s.report().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
    })
}

fn error(status: StatusCode, msg: impl Into<String>, revision: Option<u64>) -> Response {
    let body = match revision {
        Some(r) => json!({ "error": msg.into(), "revision": r }),
        None => json!({ "error": msg.into() }),
    };
    (status, Json(body)).into_response()
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("unknown session `{id}`"), None)
}

#[derive(Deserialize, Default)]
struct CreateRequest {
    script: Option<String>,
}

async fn create(State(app): State<AppState>, body: Bytes) -> Response {
    let req: CreateRequest = if body.iter().all(u8::is_ascii_whitespace) {
        CreateRequest::default()
    } else {
        match serde_json::from_slice(&body) {
            Ok(r) => r,
            Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}"), None),
        }
    };
    let mut session = new_session(app.settings);
    if let Some(script) = req.script {
        let r = tokio::task::spawn_blocking(move || session.run(&script).map(|()| session)).await;
        session = match r {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return error(StatusCode::BAD_REQUEST, e.to_string(), None),
            Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
        };
    }
    let id = format!("s{}", app.sessions.next.fetch_add(1, Ordering::Relaxed) + 1);
    let doc = state_json(&id, 0, &session);
    lock(&app.sessions.map).insert(id, Arc::new(Mutex::new(Entry { revision: 0, session })));
    (StatusCode::OK, Json(doc)).into_response()
}

async fn state(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(entry) = app.get(&id) else { return not_found(&id) };
    let e = lock(&entry);
    Json(state_json(&id, e.revision, &e.session)).into_response()
}

#[derive(Deserialize)]
struct TacticRequest {
    revision: u64,
    text: String,
}

#[derive(Deserialize)]
struct UndoRequest {
    revision: u64,
}

fn parse<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("malformed request: {e}"), None))
}

/// Applies `text` to a copy of the session at `revision` and commits it if
/// no other write got there first.
async fn mutate(app: AppState, id: String, revision: u64, text: String) -> Response {
    let Some(entry) = app.get(&id) else { return not_found(&id) };
    let mut copy = {
        let e = lock(&entry);
        if e.revision != revision {
            return error(StatusCode::CONFLICT, format!("stale revision {revision}"), Some(e.revision));
        }
        e.session.clone()
    };
    let r = tokio::task::spawn_blocking(move || copy.tactic(&text).map(|()| copy)).await;
    let next = match r {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => return error(StatusCode::BAD_REQUEST, e.msg, Some(revision)),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), Some(revision)),
    };
    let mut e = lock(&entry);
    if e.revision != revision {
        return error(StatusCode::CONFLICT, format!("stale revision {revision}"), Some(e.revision));
    }
    e.revision += 1;
    e.session = next;
    Json(state_json(&id, e.revision, &e.session)).into_response()
}

async fn tactic(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    match parse::<TacticRequest>(&body) {
        Ok(req) => mutate(app, id, req.revision, req.text).await,
        Err(r) => r,
    }
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    match parse::<UndoRequest>(&body) {
        Ok(req) => mutate(app, id, req.revision, "undo.".into()).await,
        Err(r) => r,
    }
}

/// Serves on the loopback interface until the process is stopped.
pub async fn serve(port: u16, settings: Settings) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(settings)).await
}
