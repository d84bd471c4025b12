use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use dbmx_core::engine::EngineError;
use dbmx_core::model::ModelError;
use serde::Serialize;

/// Error response: `{"code": ..., "message": ...}` with an HTTP status.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_loaded() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "CohortNotLoaded", "no cohort is loaded")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(Body {
            code: &self.code,
            message: &self.message,
        });
        (self.status, body).into_response()
    }
}

impl From<ModelError> for ApiError {
    fn from(err: ModelError) -> Self {
        let status = match &err {
            ModelError::UnknownVideoId(_) => StatusCode::NOT_FOUND,
            ModelError::UnknownVariableId(_)
            | ModelError::KindMismatch { .. }
            | ModelError::EmptySelection
            | ModelError::DuplicateVariableId(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, err.code(), err.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(err: EngineError) -> Self {
        let status = match &err {
            EngineError::UnknownInterval { .. } | EngineError::NonPositiveBins | EngineError::MissingBinning => {
                StatusCode::BAD_REQUEST
            }
            EngineError::TooFewRows { .. }
            | EngineError::TooFewColumns { .. }
            | EngineError::AllColumnsConstant
            | EngineError::TooFewValues(_)
            | EngineError::DegenerateSpread => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, err.code(), err.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        Self::new(rejection.status(), "InvalidBody", rejection.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(rejection: QueryRejection) -> Self {
        Self::bad_request("InvalidQuery", rejection.body_text())
    }
}
