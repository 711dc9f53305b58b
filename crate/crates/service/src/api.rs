//! HTTP surface under `/v1`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kgqa_core::aggregation::{RawWeights, WeightProfile};
use kgqa_core::catalog::{catalog_document, CATALOG_VERSION};
use kgqa_core::metrics::{GoldStandard, Judgment, SchemaSpec};
use kgqa_core::pipeline::{self, RetuneTarget, RunOptions};
use kgqa_core::rational::Rational;
use kgqa_core::registry::{Entity, KgRecord, RunFilter, RunStatus, Store, UseCase};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;
use tower_http::cors::CorsLayer;

use crate::error::HttpError;

#[derive(Clone)]
pub struct AppState {
    pub store: Store,
    pub run_options: RunOptions,
    /// Bounds concurrent run executions.
    pub workers: Arc<Semaphore>,
}

impl AppState {
    pub fn new(store: Store, run_options: RunOptions, workers: usize) -> Self {
        AppState {
            store,
            run_options,
            workers: Arc::new(Semaphore::new(workers.max(1))),
        }
    }
}

/// JSON body whose rejections are reported as `ApiError`.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = HttpError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| HttpError::bad_request(e.to_string()))?;
        serde_json::from_slice(&bytes)
            .map(JsonBody)
            .map_err(|e| HttpError::bad_request(format!("invalid JSON body: {e}")))
    }
}

type ApiResult<T> = Result<T, HttpError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| HttpError::internal(e.to_string()))?
}

async fn catalog() -> Json<serde_json::Value> {
    Json(serde_json::to_value(catalog_document()).expect("catalog serializes"))
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "catalog_version": CATALOG_VERSION }))
}

async fn create<E: Entity + Send + 'static>(
    State(s): State<AppState>,
    JsonBody(entity): JsonBody<E>,
) -> ApiResult<Response> {
    let id = blocking(move || Ok(s.store.register(&entity)?)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))).into_response())
}

async fn list<E: Entity + Send + 'static>(State(s): State<AppState>) -> ApiResult<Json<Vec<E>>> {
    Ok(Json(blocking(move || Ok(s.store.list::<E>()?)).await?))
}

async fn fetch<E: Entity + Send + 'static>(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<E>> {
    Ok(Json(blocking(move || Ok(s.store.get::<E>(&id)?)).await?))
}

#[derive(Debug, Deserialize)]
struct CreateRun {
    kg_id: String,
    use_case_id: String,
    profile_id: String,
}

fn flag(q: &HashMap<String, String>, key: &str) -> bool {
    q.get(key).is_some_and(|v| matches!(v.as_str(), "" | "1" | "true" | "yes"))
}

/// 202 with the pending run; execution continues on the worker pool.
/// `?wait=true` executes before answering.
async fn create_run(
    State(s): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
    JsonBody(body): JsonBody<CreateRun>,
) -> ApiResult<Response> {
    let store = s.store.clone();
    let run = blocking(move || Ok(store.create_run(&body.kg_id, &body.use_case_id, &body.profile_id)?)).await?;
    let location = format!("/v1/runs/{}", run.run_id);
    let run_id = run.run_id.clone();
    let opts = s.run_options;
    if flag(&q, "wait") {
        let _permit = s.workers.clone().acquire_owned().await.map_err(|e| HttpError::internal(e.to_string()))?;
        let store = s.store.clone();
        let done = blocking(move || Ok(pipeline::execute_run(&store, &run_id, opts)?)).await?;
        return Ok((StatusCode::OK, [(header::LOCATION, location)], Json(done)).into_response());
    }
    let workers = s.workers.clone();
    let store = s.store.clone();
    tokio::spawn(async move {
        let Ok(_permit) = workers.acquire_owned().await else { return };
        let id = run_id.clone();
        let outcome = tokio::task::spawn_blocking(move || pipeline::execute_run(&store, &id, opts)).await;
        match outcome {
            Ok(Ok(_)) => {}
            Ok(Err(e)) => log::error!("run {run_id} failed: {e}"),
            Err(e) => log::error!("run {run_id} worker panicked: {e}"),
        }
    });
    Ok((StatusCode::ACCEPTED, [(header::LOCATION, location)], Json(run)).into_response())
}

async fn list_runs(State(s): State<AppState>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Response> {
    let status = match q.get("status") {
        Some(v) => Some(RunStatus::parse(v).ok_or_else(|| HttpError::bad_request(format!("unknown status {v:?}")))?),
        None => None,
    };
    let filter = RunFilter {
        kg_id: q.get("kg_id").cloned(),
        use_case_id: q.get("use_case_id").cloned(),
        profile_id: q.get("profile_id").cloned(),
        status,
    };
    let runs = blocking(move || Ok(s.store.list_runs(&filter)?)).await?;
    Ok(Json(runs).into_response())
}

async fn get_run(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let run = blocking(move || Ok(s.store.load_run(&id)?)).await?;
    Ok(Json(run).into_response())
}

#[derive(Debug, Deserialize)]
struct JudgmentBody {
    metric_id: String,
    value: Rational,
    #[serde(default)]
    rater: String,
    #[serde(default)]
    rationale: String,
}

async fn record_judgment(
    State(s): State<AppState>,
    Path(id): Path<String>,
    JsonBody(b): JsonBody<JudgmentBody>,
) -> ApiResult<Response> {
    let strict = s.run_options.strict;
    let run = blocking(move || {
        let j = Judgment::new(b.metric_id, b.value, b.rater, b.rationale);
        Ok(pipeline::record_judgment(
            &s.store,
            &id,
            j,
            kgqa_core::aggregation::AggregationOptions { strict },
        )?)
    })
    .await?;
    Ok(Json(run).into_response())
}

async fn retune(
    State(s): State<AppState>,
    Path(id): Path<String>,
    JsonBody(target): JsonBody<RetuneTarget>,
) -> ApiResult<Response> {
    let strict = s.run_options.strict;
    let run = blocking(move || {
        Ok(pipeline::retune_run(
            &s.store,
            &id,
            target,
            kgqa_core::aggregation::AggregationOptions { strict },
        )?)
    })
    .await?;
    Ok(Json(run).into_response())
}

async fn ranking(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let profile = q.get("profile").cloned();
    let r = blocking(move || {
        let uc: UseCase = s.store.get(&id)?;
        let pid = profile
            .or(uc.default_profile_id)
            .ok_or_else(|| HttpError::bad_request("query parameter `profile` is required"))?;
        Ok(pipeline::rank_use_case(&s.store, &id, &pid)?)
    })
    .await?;
    Ok(Json(r).into_response())
}

#[derive(Debug, Deserialize)]
struct NormalizeBody {
    #[serde(default)]
    profile_id: Option<String>,
    #[serde(default)]
    use_case_id: Option<String>,
    #[serde(flatten)]
    weights: RawWeights,
}

/// Normalize raw importances into a valid profile without storing it.
async fn normalize(JsonBody(b): JsonBody<NormalizeBody>) -> ApiResult<Json<WeightProfile>> {
    b.weights
        .normalize(b.profile_id.as_deref().unwrap_or("draft"), b.use_case_id.as_deref().unwrap_or(""))
        .map(Json)
        .map_err(|e| HttpError::from(kgqa_core::pipeline::PipelineError::from(e)))
}

async fn not_found() -> HttpError {
    HttpError::not_found("no such route")
}

async fn method_not_allowed() -> HttpError {
    HttpError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this route")
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ApiConfig {
    /// Origins allowed by CORS; empty disables the CORS layer.
    pub cors_origins: Vec<String>,
}

pub fn router(state: AppState, config: &ApiConfig) -> Router {
    let v1 = Router::new()
        .route("/health", get(health))
        .route("/catalog", get(catalog))
        .route("/kgs", post(create::<KgRecord>).get(list::<KgRecord>))
        .route("/kgs/{id}", get(fetch::<KgRecord>))
        .route("/usecases", post(create::<UseCase>).get(list::<UseCase>))
        .route("/usecases/{id}", get(fetch::<UseCase>))
        .route("/usecases/{id}/ranking", get(ranking))
        .route("/profiles", post(create::<WeightProfile>).get(list::<WeightProfile>))
        .route("/profiles/{id}", get(fetch::<WeightProfile>))
        .route("/normalize", post(normalize))
        .route("/goldstandards", post(create::<GoldStandard>).get(list::<GoldStandard>))
        .route("/goldstandards/{id}", get(fetch::<GoldStandard>))
        .route("/schemas", post(create::<SchemaSpec>).get(list::<SchemaSpec>))
        .route("/schemas/{id}", get(fetch::<SchemaSpec>))
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/judgments", post(record_judgment))
        .route("/runs/{id}/retune", post(retune));
    let mut app = Router::new()
        .nest("/v1", v1)
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state);
    let origins: Vec<HeaderValue> = config.cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
    if !origins.is_empty() {
        app = app.layer(
            CorsLayer::new()
                .allow_origin(origins)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    app
}

pub async fn serve(addr: SocketAddr, state: AppState, config: ApiConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state, &config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
