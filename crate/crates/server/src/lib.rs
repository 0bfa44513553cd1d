//! HTTP JSON API for interactive sessions: scan metrics, fit and edit the
//! mixture model, evaluate clusterings. Every payload carries
//! `"schema": 1`; sessions are chosen with the `session` query parameter.

mod error;
mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use distmodes::dataset::{parse_csv, ColumnRef, CoordinateSystem, DataMatrix};
use distmodes::density::DipNullCache;
use distmodes::distances::MetricId;
use distmodes::gmm::GmmParams;
use distmodes::pipeline::{PartitionSpec, SessionState, Versioned};

pub use error::{ApiError, ApiResult};
pub use store::{check_id, SessionStore};

pub const SESSION_HEADER: &str = "x-session-id";

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum JobStatus {
    Running,
    Done { result: serde_json::Value },
    Failed { error: String, code: u16 },
}

#[derive(Debug)]
pub struct AppState {
    pub store: SessionStore,
    pub cache: DipNullCache,
    jobs: Mutex<HashMap<u64, JobStatus>>,
    next_job: AtomicU64,
}

pub type App = Arc<AppState>;

impl AppState {
    pub fn new(session_dir: impl Into<PathBuf>) -> std::io::Result<App> {
        Ok(Arc::new(AppState {
            store: SessionStore::new(session_dir)?,
            cache: DipNullCache::new(),
            jobs: Mutex::new(HashMap::new()),
            next_job: AtomicU64::new(1),
        }))
    }
}

pub fn router(app: App) -> Router {
    Router::new()
        .route("/scan", get(get_scan).post(post_scan))
        .route("/density/{metric}", get(get_density))
        .route("/gmm", get(get_gmm))
        .route("/gmm/fit", post(post_fit))
        .route("/gmm/params", put(put_params))
        .route("/evaluate", post(post_evaluate))
        .route("/report", get(get_report))
        .route("/jobs/{id}", get(get_job))
        .with_state(app)
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, session_dir: PathBuf) -> std::io::Result<()> {
    let app = AppState::new(session_dir)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(app)).await
}

#[derive(Debug, Deserialize)]
struct SessionQuery {
    session: Option<String>,
    format: Option<String>,
}

impl SessionQuery {
    fn id(&self) -> ApiResult<&str> {
        self.session
            .as_deref()
            .ok_or_else(|| ApiError::bad_request("missing session query parameter"))
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    Ok(serde_json::from_slice(body)?)
}

fn versioned<T: Serialize>(body: &T) -> ApiResult<serde_json::Value> {
    serde_json::to_value(Versioned::new(body)).map_err(|e| ApiError::internal(e.to_string()))
}

fn json_response(status: StatusCode, value: serde_json::Value, session: &str) -> Response {
    let mut r = (status, Json(value)).into_response();
    if let Ok(v) = HeaderValue::from_str(session) {
        r.headers_mut().insert(SESSION_HEADER, v);
    }
    r
}

type Work = Box<dyn FnOnce(&mut SessionState, &DipNullCache) -> ApiResult<serde_json::Value> + Send>;

/// Runs `work` on a copy of the session under its lock and commits the copy
/// (memory and disk) only when the work succeeds.
async fn mutate(app: &App, handle: store::SessionHandle, work: Work) -> ApiResult<serde_json::Value> {
    let mut guard = handle.lock_owned().await;
    let app = app.clone();
    tokio::task::spawn_blocking(move || {
        let mut next = guard.clone();
        let out = work(&mut next, &app.cache)?;
        app.store.save(&next)?;
        *guard = next;
        Ok(out)
    })
    .await
    .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

/// Runs `work` now, or as a background job when `wait` is false.
async fn run(app: &App, session: &str, handle: store::SessionHandle, wait: bool, work: Work) -> Response {
    if wait {
        return match mutate(app, handle, work).await {
            Ok(v) => json_response(StatusCode::OK, v, session),
            Err(e) => e.into_response(),
        };
    }
    let id = app.next_job.fetch_add(1, Ordering::Relaxed);
    app.jobs.lock().expect("job table poisoned").insert(id, JobStatus::Running);
    let app2 = app.clone();
    tokio::spawn(async move {
        let status = match mutate(&app2, handle, work).await {
            Ok(result) => JobStatus::Done { result },
            Err(e) => JobStatus::Failed {
                error: e.message,
                code: e.status.as_u16(),
            },
        };
        app2.jobs.lock().expect("job table poisoned").insert(id, status);
    });
    let body = serde_json::json!({ "schema": 1, "job": id, "status": "running" });
    json_response(StatusCode::ACCEPTED, body, session)
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
struct DatasetPayload {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    rows: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    csv: Option<String>,
    #[serde(default = "yes")]
    header: bool,
    /// CSV column to drop from the features, by name or index.
    #[serde(default)]
    label_column: Option<String>,
    #[serde(default)]
    coordinates: CoordinateSystem,
}

impl DatasetPayload {
    fn into_matrix(self) -> ApiResult<(String, DataMatrix<f64>)> {
        let m = match (self.rows, self.csv) {
            (Some(rows), None) => DataMatrix::from_rows(&rows)?,
            (None, Some(text)) => {
                let col = self.label_column.as_deref().map(|c| c.parse::<ColumnRef>().expect("infallible"));
                parse_csv(&text, self.header, col.as_ref())?.0
            }
            _ => return Err(ApiError::bad_request("dataset needs exactly one of rows or csv")),
        };
        let m = if self.coordinates == CoordinateSystem::Cartesian {
            m
        } else {
            DataMatrix::new(
                m.rows(),
                m.cols(),
                m.values().to_vec(),
                m.feature_names().to_vec(),
                self.coordinates,
            )?
        };
        Ok((self.name.unwrap_or_else(|| "dataset".into()), m))
    }
}

#[derive(Debug, Deserialize)]
struct ScanRequest {
    #[serde(default)]
    dataset: Option<DatasetPayload>,
    metrics: Vec<MetricId>,
    #[serde(default)]
    n_boot: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default = "yes")]
    wait: bool,
}

async fn post_scan(State(app): State<App>, Query(q): Query<SessionQuery>, body: Bytes) -> Response {
    let req: ScanRequest = match parse(&body) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    let (id, handle) = match session_for_scan(&app, q.session, req.dataset.is_some()) {
        Ok(x) => x,
        Err(e) => return e.into_response(),
    };
    let dataset = match req.dataset.map(DatasetPayload::into_matrix).transpose() {
        Ok(d) => d,
        Err(e) => return e.into_response(),
    };
    let (metrics, n_boot, seed) = (req.metrics, req.n_boot, req.seed);
    let work: Work = Box::new(move |s, cache| {
        if let Some((name, m)) = dataset {
            s.set_data(name, m);
        }
        if let Some(n) = n_boot {
            s.config.plot.n_boot = n;
        }
        if let Some(seed) = seed {
            s.config.plot.seed = seed;
        }
        versioned(s.run_scan(&metrics, cache)?)
    });
    run(&app, &id, handle, req.wait, work).await
}

fn session_for_scan(
    app: &App,
    session: Option<String>,
    has_dataset: bool,
) -> ApiResult<(String, store::SessionHandle)> {
    match (session, has_dataset) {
        (Some(id), true) => Ok((id.clone(), app.store.get_or_create(&id)?)),
        (Some(id), false) => Ok((id.clone(), app.store.get(&id)?)),
        (None, true) => {
            let id = uuid::Uuid::new_v4().simple().to_string();
            Ok((id.clone(), app.store.get_or_create(&id)?))
        }
        (None, false) => Err(ApiError::bad_request("a new session needs a dataset")),
    }
}

async fn read_session<T: Serialize>(
    app: &App,
    q: &SessionQuery,
    f: impl FnOnce(&SessionState) -> ApiResult<T>,
) -> Response {
    let result = async {
        let id = q.id()?;
        let handle = app.store.get(id)?;
        let guard = handle.lock().await;
        versioned(&f(&guard)?)
    }
    .await;
    match result {
        Ok(v) => json_response(StatusCode::OK, v, q.session.as_deref().unwrap_or_default()),
        Err(e) => e.into_response(),
    }
}

fn conflict(msg: &str) -> ApiError {
    ApiError::new(StatusCode::CONFLICT, msg)
}

async fn get_scan(State(app): State<App>, Query(q): Query<SessionQuery>) -> Response {
    read_session(&app, &q, |s| s.scan.clone().ok_or_else(|| conflict("no scan in this session"))).await
}

async fn get_density(State(app): State<App>, Path(metric): Path<String>, Query(q): Query<SessionQuery>) -> Response {
    let metric: MetricId = match metric.parse() {
        Ok(m) => m,
        Err(e) => return ApiError::from(e).into_response(),
    };
    read_session(&app, &q, |s| {
        let scan = s.scan.as_ref().ok_or_else(|| conflict("no scan in this session"))?;
        let entry = scan
            .get(metric)
            .ok_or_else(|| ApiError::not_found(format!("metric {metric} was not scanned")))?;
        entry
            .plot()
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("metric {metric} failed during the scan")))
    })
    .await
}

async fn get_gmm(State(app): State<App>, Query(q): Query<SessionQuery>) -> Response {
    read_session(&app, &q, |s| s.model.clone().ok_or_else(|| conflict("no model in this session"))).await
}

#[derive(Debug, Deserialize)]
struct FitRequest {
    #[serde(default)]
    metric: Option<MetricId>,
    components: usize,
    #[serde(default)]
    restarts: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default = "yes")]
    wait: bool,
}

async fn post_fit(State(app): State<App>, Query(q): Query<SessionQuery>, body: Bytes) -> Response {
    let prep = (|| {
        let req: FitRequest = parse(&body)?;
        let id = q.id()?.to_string();
        let handle = app.store.get(&id)?;
        Ok::<_, ApiError>((req, id, handle))
    })();
    let (req, id, handle) = match prep {
        Ok(x) => x,
        Err(e) => return e.into_response(),
    };
    let work: Work = Box::new(move |s, cache| {
        if let Some(metric) = req.metric {
            if s.metric != Some(metric) {
                s.choose_metric(metric)?;
            }
        }
        if let Some(r) = req.restarts {
            s.config.em.restarts = r;
        }
        if let Some(seed) = req.seed {
            s.config.em.seed = seed;
        }
        if let Some(m) = req.max_iter {
            s.config.em.max_iter = m;
        }
        versioned(s.run_model(req.components, cache)?)
    });
    run(&app, &id, handle, req.wait, work).await
}

async fn put_params(State(app): State<App>, Query(q): Query<SessionQuery>, body: Bytes) -> Response {
    let prep = (|| {
        let params: GmmParams<f64> = parse(&body)?;
        let id = q.id()?.to_string();
        let handle = app.store.get(&id)?;
        Ok::<_, ApiError>((params, id, handle))
    })();
    let (params, id, handle) = match prep {
        Ok(x) => x,
        Err(e) => return e.into_response(),
    };
    let work: Work = Box::new(move |s, cache| versioned(s.set_model_params(params, cache)?));
    run(&app, &id, handle, true, work).await
}

#[derive(Debug, Deserialize)]
struct EvaluateRequest {
    partitions: Vec<PartitionSpec>,
}

async fn post_evaluate(State(app): State<App>, Query(q): Query<SessionQuery>, body: Bytes) -> Response {
    let prep = (|| {
        let req: EvaluateRequest = parse(&body)?;
        let id = q.id()?.to_string();
        let handle = app.store.get(&id)?;
        Ok::<_, ApiError>((req, id, handle))
    })();
    let (req, id, handle) = match prep {
        Ok(x) => x,
        Err(e) => return e.into_response(),
    };
    let work: Work = Box::new(move |s, cache| {
        let partitions = s.build_partitions(&req.partitions)?;
        s.run_evaluate(partitions, cache)?;
        versioned(&s.evaluation_report().expect("evaluation just ran"))
    });
    run(&app, &id, handle, true, work).await
}

async fn get_report(State(app): State<App>, Query(q): Query<SessionQuery>) -> Response {
    if q.format.as_deref() == Some("text") {
        let result = async {
            let handle = app.store.get(q.id()?)?;
            let text = handle.lock().await.report();
            Ok::<_, ApiError>(text)
        }
        .await;
        return match result {
            Ok(text) => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response(),
            Err(e) => e.into_response(),
        };
    }
    read_session(&app, &q, |s| Ok(s.clone())).await
}

async fn get_job(State(app): State<App>, Path(id): Path<u64>) -> Response {
    let status = app.jobs.lock().expect("job table poisoned").get(&id).cloned();
    match status {
        Some(s) => {
            let mut v = serde_json::to_value(&s).unwrap_or_default();
            v["schema"] = 1.into();
            v["job"] = id.into();
            (StatusCode::OK, Json(v)).into_response()
        }
        None => ApiError::not_found(format!("unknown job {id}")).into_response(),
    }
}
