use std::collections::HashSet;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use oli_core::session::{DragEvent, Session, SessionError, WeightEdit};
use tokio::sync::oneshot;

use super::payload::{
    CreateSession, FeatureValues, LayoutPayload, LogResponse, OliRequest, Pending, SessionCreated,
    WeightValue,
};
use super::state::{AppState, Outcome, SessionSlot};
use super::ApiError;
use crate::schema::PAYLOAD_SCHEMA;

type ApiResult<T> = Result<T, ApiError>;

fn slot(state: &AppState, id: &str) -> ApiResult<Arc<SessionSlot>> {
    state
        .get(id)
        .ok_or_else(|| ApiError::not_found(format!("session {id:?}")))
}

pub async fn schema() -> Response {
    (
        [(header::CONTENT_TYPE, "application/schema+json")],
        PAYLOAD_SCHEMA,
    )
        .into_response()
}

pub async fn list_datasets(State(state): State<AppState>) -> ApiResult<Response> {
    let registry = state.registry.clone();
    let list = tokio::task::spawn_blocking(move || registry.list())
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(format!("cannot read data directory: {e}")))?;
    Ok(Json(list).into_response())
}

fn content_type(path: &str) -> &'static str {
    let ext = path.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("svg") => "image/svg+xml",
        _ => "application/octet-stream",
    }
}

pub async fn thumbnail(
    State(state): State<AppState>,
    Path((name, path)): Path<(String, String)>,
) -> ApiResult<Response> {
    let registry = state.registry.clone();
    let lookup = path.clone();
    let file = tokio::task::spawn_blocking(move || registry.thumbnail(&name, &lookup))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .ok_or_else(|| ApiError::not_found(format!("thumbnail {path:?}")))?;
    let bytes = tokio::fs::read(&file)
        .await
        .map_err(|_| ApiError::not_found(format!("thumbnail {path:?}")))?;
    Ok(([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response())
}

pub async fn create_session(
    State(state): State<AppState>,
    Json(req): Json<CreateSession>,
) -> ApiResult<Response> {
    let manifest = state
        .registry
        .manifest_path(&req.dataset)
        .ok_or_else(|| ApiError::not_found(format!("dataset {:?}", req.dataset)))?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = {
        let id = id.clone();
        tokio::task::spawn_blocking(move || Session::from_manifest(id, manifest))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??
    };
    let payload = LayoutPayload::of(&session);
    state.insert(session);
    tracing::info!(session = %id, dataset = %req.dataset, "session created");
    let body = SessionCreated {
        session_id: id,
        dataset: req.dataset,
        payload,
    };
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

pub async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<LayoutPayload>> {
    Ok(Json(slot(&state, &id)?.read(LayoutPayload::of)))
}

pub async fn item_features(
    State(state): State<AppState>,
    Path((id, item_id)): Path<(String, String)>,
) -> ApiResult<Json<FeatureValues>> {
    let values = slot(&state, &id)?
        .read(|s| s.item_feature_values(&item_id).map(<[f64]>::to_vec))
        .map_err(|_| ApiError::not_found(format!("item {item_id:?}")))?;
    Ok(Json(FeatureValues { item_id, values }))
}

pub async fn log(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<LogResponse>> {
    Ok(Json(slot(&state, &id)?.read(|s| LogResponse {
        revision: s.revision(),
        interaction_cost: s.interaction_cost(),
        entries: s.log().to_vec(),
    })))
}

/// Runs a validated mutation. Answers with the new payload, or 202 when the
/// solve outlives the deadline; the work continues either way.
async fn mutate<F>(state: &AppState, slot: Arc<SessionSlot>, op: F) -> ApiResult<Response>
where
    F: FnOnce(&mut Session, oli_core::CancelToken) -> Result<(), SessionError> + Send + 'static,
{
    let after_revision = slot.read(Session::revision);
    let (tx, mut rx) = oneshot::channel();
    let task = tokio::spawn(slot.mutate(op, tx));
    match tokio::time::timeout(state.deadline, task).await {
        Ok(Ok(Outcome::Done(payload))) => Ok(Json(payload).into_response()),
        Ok(Ok(Outcome::Failed(e))) => Err(e.into()),
        Ok(Err(e)) => Err(ApiError::internal(e.to_string())),
        Err(_) => {
            let body = Pending {
                pending: true,
                revision: rx.try_recv().ok(),
                after_revision,
            };
            Ok((StatusCode::ACCEPTED, Json(body)).into_response())
        }
    }
}

/// Checks a drag batch against the session without staging anything.
fn validate_drags(session: &Session, drags: &[DragEvent]) -> Result<(), ApiError> {
    for d in drags {
        session.validate_drag(d)?;
    }
    let distinct: HashSet<&str> = drags.iter().map(|d| d.item_id.as_str()).collect();
    if distinct.len() < 2 {
        return Err(ApiError::unprocessable(format!(
            "at least 2 distinct items must be dragged, got {}",
            distinct.len()
        )));
    }
    let first = drags[0].new_position;
    if drags.iter().all(|d| d.new_position == first) {
        return Err(ApiError::unprocessable(
            "all drags land on the same point; no distances are expressed",
        ));
    }
    Ok(())
}

pub async fn commit_oli(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<OliRequest>,
) -> ApiResult<Response> {
    let slot = slot(&state, &id)?;
    let drags: Vec<DragEvent> = req
        .drags
        .into_iter()
        .map(|d| DragEvent::new(d.item_id, d.x, d.y))
        .collect();
    slot.read(|s| validate_drags(s, &drags))?;
    tracing::info!(session = %id, drags = drags.len(), "oli commit");
    mutate(&state, slot, move |s, cancel| {
        s.clear_staged();
        for d in drags {
            s.stage_drag(d)?;
        }
        let result = s.commit_oli_with(Some(cancel));
        s.clear_staged();
        result
    })
    .await
}

pub async fn set_weight(
    State(state): State<AppState>,
    Path((id, k)): Path<(String, usize)>,
    Json(req): Json<WeightValue>,
) -> ApiResult<Response> {
    let slot = slot(&state, &id)?;
    let edit = WeightEdit {
        feature_index: k,
        new_weight: req.value,
    };
    slot.read(|s| s.validate_weight_edit(&edit))?;
    mutate(&state, slot, move |s, cancel| {
        s.apply_weight_edit_with(edit, Some(cancel))
    })
    .await
}

pub async fn maximize(
    State(state): State<AppState>,
    Path((id, k)): Path<(String, usize)>,
) -> ApiResult<Response> {
    let slot = slot(&state, &id)?;
    slot.read(|s| s.validate_feature(k))?;
    mutate(&state, slot, move |s, cancel| {
        s.maximize_weight_with(k, Some(cancel))
    })
    .await
}

pub async fn reset(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let slot = slot(&state, &id)?;
    mutate(&state, slot, |s, _| {
        s.reset();
        Ok(())
    })
    .await
}
