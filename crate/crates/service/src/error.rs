use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use kgqa_core::aggregation::AggregationError;
use kgqa_core::pipeline::PipelineError;
use kgqa_core::registry::StoreError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Body of every non-success response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub details: Value,
}

/// Broad failure classes shared by HTTP statuses and CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Conflict,
    NotFound,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation | ErrorClass::Conflict => 1,
            ErrorClass::Io => 2,
            ErrorClass::NotFound => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpError {
    pub status: StatusCode,
    pub body: ApiError,
}

impl HttpError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        HttpError {
            status,
            body: ApiError {
                code: code.to_string(),
                message: message.into(),
                details: Value::Null,
            },
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.body.details = details;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        HttpError::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        HttpError::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        HttpError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for HttpError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn store_error(e: &StoreError) -> (ErrorClass, &'static str, Value) {
    match e {
        StoreError::Io { path, .. } => (ErrorClass::Io, "io", json!({ "path": path })),
        StoreError::Integrity { path, reason } => (ErrorClass::Io, "integrity", json!({ "path": path, "reason": reason })),
        StoreError::NotFound { kind, id } => (ErrorClass::NotFound, "not_found", json!({ "kind": kind, "id": id })),
        StoreError::Collision { kind, id } => (ErrorClass::Conflict, "collision", json!({ "kind": kind, "id": id })),
        StoreError::Invalid { kind, reason } => (ErrorClass::Validation, "validation", json!({ "kind": kind, "reason": reason })),
        StoreError::InvalidProfile(v) => (
            ErrorClass::Validation,
            "invalid_profile",
            json!({ "violations": v, "messages": v.iter().map(ToString::to_string).collect::<Vec<_>>() }),
        ),
    }
}

/// Class, machine code, and structured details of an engine error.
pub fn classify(e: &PipelineError) -> (ErrorClass, &'static str, Value) {
    match e {
        PipelineError::Store(s) => store_error(s),
        PipelineError::Judgment(_) => (ErrorClass::Validation, "invalid_judgment", Value::Null),
        PipelineError::Aggregation(AggregationError::InvalidProfile(v)) => (
            ErrorClass::Validation,
            "invalid_profile",
            json!({ "violations": v, "messages": v.iter().map(ToString::to_string).collect::<Vec<_>>() }),
        ),
        PipelineError::Aggregation(_) => (ErrorClass::Validation, "aggregation", Value::Null),
        PipelineError::NotExecuted(id) => (ErrorClass::Conflict, "not_executed", json!({ "run_id": id })),
        PipelineError::Ingest(_) => (ErrorClass::Io, "ingest_failed", Value::Null),
    }
}

impl From<PipelineError> for HttpError {
    fn from(e: PipelineError) -> Self {
        let (class, code, details) = classify(&e);
        let status = match (class, code) {
            (ErrorClass::Validation, _) => StatusCode::BAD_REQUEST,
            (ErrorClass::Conflict, _) => StatusCode::CONFLICT,
            (ErrorClass::NotFound, _) => StatusCode::NOT_FOUND,
            (ErrorClass::Io, "ingest_failed") => StatusCode::BAD_GATEWAY,
            (ErrorClass::Io, _) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        HttpError::new(status, code, e.to_string()).with_details(details)
    }
}

impl From<StoreError> for HttpError {
    fn from(e: StoreError) -> Self {
        PipelineError::from(e).into()
    }
}
