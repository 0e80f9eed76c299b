use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

use toffa_core::ccf::CcfError;
use toffa_core::contribution::ContributionError;
use toffa_core::diag::Diagnostic;
use toffa_core::optimizer::{OptimizeError, SolverError};
use toffa_core::scenario::ScenarioError;
use toffa_core::tradeoff::TradeoffError;
use toffa_core::ParseError;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no session {0}")]
    NotFound(String),
    #[error("malformed request body: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("model has errors")]
    InvalidModel(Vec<Diagnostic>),
    #[error("no scenario given and none stored for this session")]
    NoScenario,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Ccf(#[from] CcfError),
    #[error(transparent)]
    Contribution(#[from] ContributionError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Tradeoff(#[from] TradeoffError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::NotFound(_) => "not-found",
            ApiError::BadRequest(_) => "bad-request",
            ApiError::Parse(_) => "parse-error",
            ApiError::InvalidModel(_) => "invalid-model",
            ApiError::NoScenario => "no-scenario",
            ApiError::Scenario(_) => "scenario-error",
            ApiError::Ccf(_) => "ccf-error",
            ApiError::Contribution(_) => "contribution-error",
            ApiError::Optimize(OptimizeError::Solver(SolverError::Infeasible { .. })) => {
                "infeasible"
            }
            ApiError::Optimize(_) => "solver-error",
            ApiError::Tradeoff(_) => "tradeoff-error",
            ApiError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }

    fn details(&self) -> serde_json::Value {
        match self {
            ApiError::Parse(e) => json!({ "line": e.line, "column": e.column }),
            ApiError::InvalidModel(d) => json!({ "diagnostics": d }),
            ApiError::Optimize(OptimizeError::Solver(SolverError::Infeasible { conflict })) => {
                json!({ "conflict": conflict })
            }
            _ => serde_json::Value::Null,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "error": {
                "code": self.code(),
                "message": self.to_string(),
                "details": self.details(),
            }
        });
        (self.status(), Json(body)).into_response()
    }
}
