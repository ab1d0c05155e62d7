//! HTTP routes and the per-session push channel.

mod events;
mod handlers;
pub mod payload;
mod state;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use oli_core::session::SessionError;
use serde_json::json;

pub use state::{AppState, ServerConfig};

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/schema", get(handlers::schema))
        .route("/datasets", get(handlers::list_datasets))
        .route("/datasets/{name}/thumbs/{*path}", get(handlers::thumbnail))
        .route("/sessions", post(handlers::create_session))
        .route("/sessions/{id}", get(handlers::get_session))
        .route("/sessions/{id}/oli", post(handlers::commit_oli))
        .route("/sessions/{id}/weights/{k}", put(handlers::set_weight))
        .route(
            "/sessions/{id}/weights/{k}/maximize",
            post(handlers::maximize),
        )
        .route(
            "/sessions/{id}/items/{item_id}/features",
            get(handlers::item_features),
        )
        .route("/sessions/{id}/log", get(handlers::log))
        .route("/sessions/{id}/reset", post(handlers::reset))
        .route("/sessions/{id}/events", get(events::subscribe))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    pub fn not_found(what: impl std::fmt::Display) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: format!("{what} not found"),
        }
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            message: message.into(),
        }
    }

    pub(crate) fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: message.into(),
        }
    }
}

/// Session errors are caused by the request or the dataset it names.
impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError::unprocessable(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}
