use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::response::Response;
use tokio::sync::broadcast::error::RecvError;
use tokio::sync::broadcast::Receiver;

use super::payload::Event;
use super::state::AppState;
use super::ApiError;

/// Close code sent when a subscriber fell too far behind; the client is
/// expected to re-sync with `GET /sessions/{id}`.
const CLOSE_LAGGED: u16 = 4000;

pub async fn subscribe(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let slot = state
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("session {id:?}")))?;
    // Subscribe before the upgrade completes so no revision published after
    // the handshake can be missed.
    let rx = slot.subscribe();
    Ok(ws.on_upgrade(move |socket| forward(socket, rx)))
}

async fn forward(mut socket: WebSocket, mut rx: Receiver<Event>) {
    loop {
        tokio::select! {
            event = rx.recv() => match event {
                Ok(event) => {
                    let text = serde_json::to_string(&event).expect("event serializes");
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        return;
                    }
                }
                Err(RecvError::Lagged(missed)) => {
                    let frame = CloseFrame {
                        code: CLOSE_LAGGED,
                        reason: format!("missed {missed} events; re-sync").into(),
                    };
                    let _ = socket.send(Message::Close(Some(frame))).await;
                    return;
                }
                Err(RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
