use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;

use copath_core::error::{IoError, SolveError, WhatIfError};
use copath_core::validate::ValidationReport;

/// Error body: `{code, message, details}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_request", message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session {id}"))
    }

    pub fn invalid_instance(report: &ValidationReport) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_instance", report.to_string())
            .with_details(serde_json::to_value(&report.violations).unwrap_or(Value::Null))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<IoError> for ApiError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Validation(report) => Self::invalid_instance(&report),
            IoError::Parse { file, line, reason } => Self::bad_request(format!("{file}:{line}: {reason}"))
                .with_details(serde_json::json!({ "file": file, "line": line })),
            IoError::Io(e) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", e.to_string()),
        }
    }
}

impl From<SolveError> for ApiError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Timeout(_) => Self::new(StatusCode::GATEWAY_TIMEOUT, "solver_timeout", e.to_string()),
            SolveError::Infeasible(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "infeasible", e.to_string()),
            SolveError::Encode(ref inner) => match inner {
                copath_core::error::EncodeError::InvalidInstance(report) => Self::invalid_instance(report),
                _ => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_instance", e.to_string()),
            },
            _ => Self::new(StatusCode::BAD_GATEWAY, "backend_failure", e.to_string()),
        }
    }
}

impl From<WhatIfError> for ApiError {
    fn from(e: WhatIfError) -> Self {
        match e {
            WhatIfError::Solve(inner) => inner.into(),
            WhatIfError::InfeasibleDelta(ref node) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "infeasible_delta", e.to_string())
                    .with_details(serde_json::json!({ "node": node }))
            }
            WhatIfError::UnknownEntity(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown_entity", e.to_string()),
            WhatIfError::InvalidDelta(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_delta", e.to_string()),
        }
    }
}
