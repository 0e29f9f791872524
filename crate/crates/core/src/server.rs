//! HTTP front end. One task owns the engine and runs requests in arrival
//! order; every event it appends is also pushed to stream subscribers.

use std::collections::{BTreeMap, VecDeque};
use std::convert::Infallible;
use std::net::SocketAddr;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{broadcast, mpsc, oneshot};

use crate::engine::{Engine, InjectError, LoadError};
use crate::expr::Value;
use crate::graph::Event;

pub const ACTOR_HEADER: &str = "x-actor";
pub const DEFAULT_ACTOR: &str = "operator";

type Job = Box<dyn FnOnce(&mut Engine) + Send>;

#[derive(Clone)]
pub struct AppState {
    jobs: mpsc::Sender<Job>,
    events: broadcast::Sender<Event>,
}

impl AppState {
    /// Starts the engine task. Must be called inside a Tokio runtime.
    pub fn spawn(mut engine: Engine) -> Self {
        let (jobs, mut rx) = mpsc::channel::<Job>(256);
        let (events, _) = broadcast::channel(1024);
        let publish = events.clone();
        tokio::spawn(async move {
            let mut published = engine.graph().last_seq();
            while let Some(job) = rx.recv().await {
                job(&mut engine);
                for e in &engine.graph().events()[published as usize..] {
                    // No subscribers is fine; late joiners read the backlog.
                    let _ = publish.send(e.clone());
                }
                published = engine.graph().last_seq();
            }
        });
        AppState { jobs, events }
    }

    /// Runs `f` on the engine after every request queued before it.
    pub async fn with_engine<R: Send + 'static>(
        &self,
        f: impl FnOnce(&mut Engine) -> R + Send + 'static,
    ) -> R {
        let (tx, rx) = oneshot::channel();
        let job: Job = Box::new(move |engine| {
            let _ = tx.send(f(engine));
        });
        self.jobs.send(job).await.expect("engine task is alive");
        rx.await.expect("engine task replies")
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/state/{individual}", get(get_state))
        .route("/actions/{individual}", get(get_actions))
        .route("/events", post(post_event))
        .route("/views", get(get_views))
        .route("/views/{name}", get(get_view))
        .route("/stream", get(stream))
        .route("/models", post(post_models))
        .route("/log", get(get_log))
        .with_state(state)
}

pub async fn serve(engine: Engine, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::spawn(engine))).await
}

fn error(status: StatusCode, code: &str, message: String, detail: serde_json::Value) -> Response {
    (
        status,
        Json(json!({ "code": code, "message": message, "detail": detail })),
    )
        .into_response()
}

fn not_found(what: &str, name: &str) -> Response {
    error(
        StatusCode::NOT_FOUND,
        "NotFound",
        format!("no {what} `{name}`"),
        serde_json::Value::Null,
    )
}

#[derive(Debug, Serialize)]
struct IndividualState {
    individual: String,
    concept: String,
    model: String,
    properties: BTreeMap<String, Value>,
}

async fn get_state(State(app): State<AppState>, Path(individual): Path<String>) -> Response {
    let id = individual.clone();
    let found = app
        .with_engine(move |e| {
            let info = e.state().individual(&id)?.clone();
            Some(IndividualState {
                properties: e.state().properties(&id).cloned().unwrap_or_default(),
                individual: id,
                concept: info.concept,
                model: info.model,
            })
        })
        .await;
    match found {
        Some(s) => Json(s).into_response(),
        None => not_found("individual", &individual),
    }
}

async fn get_actions(State(app): State<AppState>, Path(individual): Path<String>) -> Response {
    let id = individual.clone();
    let found = app
        .with_engine(move |e| {
            e.state().individual(&id)?;
            Some(e.available_actions(Some(&id)))
        })
        .await;
    match found {
        Some(a) => Json(a).into_response(),
        None => not_found("individual", &individual),
    }
}

/// Request body of `POST /events`. Plain JSON scalars are accepted as
/// values; relation values may be given as the target's id string.
#[derive(Debug, Deserialize)]
pub struct PostEvent {
    pub individual: String,
    pub property: String,
    pub value: WireValue,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum WireValue {
    Tagged(Value),
    Bool(bool),
    Num(f64),
    Str(String),
}

impl From<WireValue> for Value {
    fn from(w: WireValue) -> Self {
        match w {
            WireValue::Tagged(v) => v,
            WireValue::Bool(b) => Value::Bool(b),
            WireValue::Num(n) => Value::Num(n),
            WireValue::Str(s) => Value::Str(s),
        }
    }
}

fn inject_status(e: &InjectError) -> StatusCode {
    match e {
        InjectError::UnknownSlot { .. } => StatusCode::NOT_FOUND,
        InjectError::ConditionNotMet { .. } | InjectError::ImmutableViolation { .. } => {
            StatusCode::CONFLICT
        }
        InjectError::ValueConditionViolation { .. } | InjectError::InvalidValue { .. } => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        InjectError::CascadeBudgetExceeded { .. } => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn actor(headers: &HeaderMap) -> String {
    headers
        .get(ACTOR_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|s| !s.trim().is_empty())
        .unwrap_or(DEFAULT_ACTOR)
        .to_string()
}

async fn post_event(
    State(app): State<AppState>,
    headers: HeaderMap,
    Json(body): Json<PostEvent>,
) -> Response {
    let actor = actor(&headers);
    let result = app
        .with_engine(move |e| e.inject(&actor, &body.individual, &body.property, body.value.into()))
        .await;
    match result {
        Ok(report) => (StatusCode::CREATED, Json(report)).into_response(),
        Err(err) => error(
            inject_status(&err),
            err.code(),
            err.to_string(),
            serde_json::to_value(&err).unwrap_or_default(),
        ),
    }
}

async fn get_views(State(app): State<AppState>) -> Response {
    Json(app.with_engine(|e| e.view_names()).await).into_response()
}

async fn get_view(State(app): State<AppState>, Path(name): Path<String>) -> Response {
    let n = name.clone();
    match app.with_engine(move |e| e.view(&n)).await {
        Some(v) => Json(v).into_response(),
        None => not_found("view", &name),
    }
}

async fn post_models(State(app): State<AppState>, headers: HeaderMap, text: String) -> Response {
    let actor = actor(&headers);
    match app.with_engine(move |e| e.load_source(&text, &actor)).await {
        Ok(report) => (StatusCode::CREATED, Json(report)).into_response(),
        Err(err) => {
            let (status, code, detail) = match &err {
                LoadError::Parse(_) => {
                    (StatusCode::UNPROCESSABLE_ENTITY, "ParseError", json!(null))
                }
                LoadError::Validation(v) => (
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "ValidationError",
                    serde_json::to_value(v).unwrap_or_default(),
                ),
                LoadError::Rejected(i) => (
                    inject_status(i),
                    i.code(),
                    serde_json::to_value(i).unwrap_or_default(),
                ),
                LoadError::Cascade(_) => (
                    StatusCode::INTERNAL_SERVER_ERROR,
                    "CascadeBudgetExceeded",
                    json!(null),
                ),
            };
            error(status, code, err.to_string(), detail)
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct Since {
    #[serde(default)]
    pub since: u64,
}

async fn events_after(app: &AppState, since: u64) -> Vec<Event> {
    app.with_engine(move |e| {
        let events = e.graph().events();
        events[(since as usize).min(events.len())..].to_vec()
    })
    .await
}

async fn get_log(State(app): State<AppState>, Query(q): Query<Since>) -> Response {
    let events = events_after(&app, q.since).await;
    let body = crate::graph::export_jsonl(&events);
    ([("content-type", "application/x-ndjson")], body).into_response()
}

struct Tail {
    app: AppState,
    rx: broadcast::Receiver<Event>,
    backlog: VecDeque<Event>,
    last: u64,
}

/// Events with seq greater than `since`, then live events as they are
/// appended. Each event is sent once, in seq order.
async fn stream(
    State(app): State<AppState>,
    Query(q): Query<Since>,
) -> Sse<impl Stream<Item = Result<SseEvent, Infallible>>> {
    // Subscribe before reading the backlog so nothing falls in between.
    let rx = app.events.subscribe();
    let backlog = events_after(&app, q.since).await.into();
    let tail = Tail {
        app,
        rx,
        backlog,
        last: q.since,
    };
    let events = futures::stream::unfold(tail, |mut t| async move {
        loop {
            if let Some(e) = t.backlog.pop_front() {
                if e.seq <= t.last {
                    continue;
                }
                t.last = e.seq;
                let data = serde_json::to_string(&e).expect("events serialize");
                let sse = SseEvent::default()
                    .event("event")
                    .id(e.seq.to_string())
                    .data(data);
                return Some((Ok(sse), t));
            }
            match t.rx.recv().await {
                Ok(e) => t.backlog.push_back(e),
                Err(broadcast::error::RecvError::Lagged(_)) => {
                    t.backlog = events_after(&t.app, t.last).await.into();
                }
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(events).keep_alive(KeepAlive::default())
}
