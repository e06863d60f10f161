//! HTTP routes for the plan editor.

use std::convert::Infallible;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dribbleforge_core::document::{
    plan_to_json, DocumentError, PlanDocument, TraceDocument, MAX_GRID,
};
use dribbleforge_core::evolution::{FitnessConfig, GaConfig};
use dribbleforge_core::geometry::Point2;
use dribbleforge_core::plan::PlanError;
use dribbleforge_core::simulation::{
    sample_field, simulate, trace_metrics, FieldSample, SimConfig,
};
use dribbleforge_core::TrajectoryPlan;
use futures::stream::{self, Stream};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::jobs::{JobConfig, JobEvent, JobRegistry, SubmitError};

/// Shared server state: the workspace plan and the job registry.
#[derive(Debug)]
pub struct AppState {
    plan: RwLock<TrajectoryPlan>,
    jobs: JobRegistry,
}

impl AppState {
    pub fn new(plan: TrajectoryPlan) -> Arc<Self> {
        Arc::new(Self {
            plan: RwLock::new(plan),
            jobs: JobRegistry::default(),
        })
    }

    pub fn plan(&self) -> TrajectoryPlan {
        self.plan.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn jobs(&self) -> &JobRegistry {
        &self.jobs
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/plan", get(get_plan).put(put_plan))
        .route("/api/plan/triangulation", get(get_triangulation))
        .route("/api/optimize", post(start_optimize))
        .route("/api/optimize/{id}", get(get_job).delete(cancel_job))
        .route("/api/optimize/{id}/events", get(job_events))
        .route("/api/simulate", post(run_simulation))
        .route("/api/field", get(get_field))
        .with_state(state)
}

/// Error body: `{"error": ..., "kind": ...}` plus `node`/`param` when a plan
/// is rejected because of one node.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, kind: &str, message: impl ToString) -> Self {
        Self {
            status,
            body: json!({ "error": message.to_string(), "kind": kind }),
        }
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation_failed", message)
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no job {id:?}"))
    }

    fn invalid_plan(e: &PlanError) -> Self {
        let mut err = Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_plan", e);
        if let Some(node) = e.node() {
            err.body["node"] = json!(node);
        }
        if let PlanError::ParamOutOfRange {
            param,
            value,
            min,
            max,
            ..
        } = e
        {
            err.body["param"] = json!(param.name());
            err.body["value"] = json!(value);
            err.body["range"] = json!([min, max]);
        }
        err
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        match &e {
            DocumentError::Syntax(_) | DocumentError::BadValue(_) => {
                Self::new(StatusCode::BAD_REQUEST, "malformed", e)
            }
            DocumentError::Plan(p) => Self::invalid_plan(p),
            _ => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_document", e),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

/// Parses a JSON body ourselves so syntax errors map to our error shape.
fn parse_body<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed", e))
}

async fn get_plan(State(state): State<Arc<AppState>>) -> Response {
    json_text(plan_to_json(&state.plan()))
}

async fn put_plan(State(state): State<Arc<AppState>>, body: String) -> Result<Response, ApiError> {
    let doc: PlanDocument = parse_body(&body)?;
    let plan = doc.to_plan()?;
    let text = plan_to_json(&plan);
    *state.plan.write().unwrap_or_else(|e| e.into_inner()) = plan;
    Ok(json_text(text))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TriangulationDocument {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub hull: Vec<usize>,
}

async fn get_triangulation(State(state): State<Arc<AppState>>) -> Json<TriangulationDocument> {
    let plan = state.plan();
    let tri = plan.triangulation();
    Json(TriangulationDocument {
        vertices: tri.vertices().to_vec(),
        triangles: tri.triangles().to_vec(),
        hull: tri.hull_vertices(),
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OptimizeRequest {
    ga: GaConfig,
    fitness: FitnessConfig,
}

async fn start_optimize(
    State(state): State<Arc<AppState>>,
    body: String,
) -> Result<Response, ApiError> {
    let req: OptimizeRequest = if body.trim().is_empty() {
        OptimizeRequest::default()
    } else {
        parse_body(&body)?
    };
    req.ga.validate().map_err(ApiError::bad_request)?;
    req.fitness.validate().map_err(ApiError::bad_request)?;
    let config = JobConfig {
        ga: req.ga,
        fitness: req.fitness,
    };
    match state.jobs.submit(state.plan(), config) {
        Ok(job) => Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job.id() }))).into_response()),
        Err(SubmitError::Busy(active)) => {
            let mut err = ApiError::new(
                StatusCode::CONFLICT,
                "busy",
                "another optimization is running",
            );
            err.body["job_id"] = json!(active);
            Err(err)
        }
    }
}

async fn get_job(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let job = state
        .jobs
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    Ok(Json(job.document()).into_response())
}

async fn cancel_job(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let job = state
        .jobs
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    job.cancel();
    Ok((StatusCode::ACCEPTED, Json(job.document())).into_response())
}

/// `event: generation` per generation (history first, then live), closed by
/// one `event: status` once the job is finished.
async fn job_events(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let job = state
        .jobs
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    let events = stream::unfold(Some((job, 0usize)), |cursor| async move {
        let (job, n) = cursor?;
        match job.next_event(n).await {
            JobEvent::Generation(stats) => {
                let event = Event::default()
                    .event("generation")
                    .json_data(stats)
                    .expect("stats serialize");
                Some((Ok(event), Some((job, n + 1))))
            }
            JobEvent::Finished(status) => {
                let event = Event::default()
                    .event("status")
                    .json_data(json!({ "status": status }))
                    .expect("status serializes");
                Some((Ok(event), None))
            }
        }
    });
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateRequest {
    start: Point2,
    v0: Point2,
    #[serde(default)]
    sim_config: Option<SimConfig>,
}

async fn run_simulation(
    State(state): State<Arc<AppState>>,
    body: String,
) -> Result<Json<TraceDocument>, ApiError> {
    let req: SimulateRequest = parse_body(&body)?;
    let cfg = req.sim_config.unwrap_or_default();
    let plan = state.plan();
    let doc = tokio::task::spawn_blocking(move || {
        let trace = simulate(&plan, req.start, req.v0, &cfg)?;
        let metrics = trace_metrics(&trace, Point2::ORIGIN)?;
        Ok::<_, dribbleforge_core::simulation::SimError>(TraceDocument::new(&trace, Some(metrics)))
    })
    .await
    .expect("simulation task")
    .map_err(ApiError::bad_request)?;
    Ok(Json(doc))
}

#[derive(Debug, Deserialize)]
struct FieldQuery {
    nx: Option<usize>,
    ny: Option<usize>,
    vx: Option<f64>,
    vy: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FieldDocument {
    pub nx: usize,
    pub ny: usize,
    pub samples: Vec<FieldSample>,
}

async fn get_field(
    State(state): State<Arc<AppState>>,
    Query(q): Query<FieldQuery>,
) -> Result<Json<FieldDocument>, ApiError> {
    let (nx, ny) = (q.nx.unwrap_or(40), q.ny.unwrap_or(30));
    if !(1..=MAX_GRID).contains(&nx) || !(1..=MAX_GRID).contains(&ny) {
        return Err(ApiError::bad_request(format!(
            "grid must be within 1..={MAX_GRID} per axis"
        )));
    }
    let v0 = Point2::new(q.vx.unwrap_or(4.0), q.vy.unwrap_or(0.0));
    let plan = state.plan();
    let samples =
        tokio::task::spawn_blocking(move || sample_field(&plan, nx, ny, v0, &SimConfig::default()))
            .await
            .expect("field task")
            .map_err(ApiError::bad_request)?;
    Ok(Json(FieldDocument { nx, ny, samples }))
}
