use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use oli_core::session::{Session, SessionError};
use oli_core::CancelToken;
use tokio::sync::{broadcast, oneshot};

use super::payload::{Event, LayoutPayload};
use crate::registry::Registry;

const EVENT_BUFFER: usize = 64;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub data_dir: std::path::PathBuf,
    /// Mutations whose solve takes longer than this answer 202.
    pub deadline: Duration,
}

impl ServerConfig {
    pub fn new(data_dir: impl Into<std::path::PathBuf>) -> Self {
        ServerConfig {
            data_dir: data_dir.into(),
            deadline: Duration::from_secs(10),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub(crate) registry: Registry,
    pub(crate) deadline: Duration,
    sessions: Arc<RwLock<HashMap<String, Arc<SessionSlot>>>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        AppState {
            registry: Registry::new(config.data_dir),
            deadline: config.deadline,
            sessions: Arc::default(),
        }
    }

    pub(crate) fn insert(&self, session: Session) -> Arc<SessionSlot> {
        let id = session.session_id().to_string();
        let slot = Arc::new(SessionSlot::new(session));
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, slot.clone());
        slot
    }

    pub(crate) fn get(&self, id: &str) -> Option<Arc<SessionSlot>> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
    }
}

/// One session behind a single-writer discipline. Readers take the state
/// lock briefly; writers queue on `writer`, compute on a private copy off the
/// async runtime, and swap the result in.
pub(crate) struct SessionSlot {
    state: RwLock<Session>,
    writer: tokio::sync::Mutex<()>,
    inflight: Mutex<Option<(u64, CancelToken)>>,
    next_ticket: Mutex<u64>,
    events: broadcast::Sender<Event>,
}

pub(crate) enum Outcome {
    Done(LayoutPayload),
    Failed(SessionError),
}

impl SessionSlot {
    fn new(session: Session) -> Self {
        let (events, _) = broadcast::channel(EVENT_BUFFER);
        SessionSlot {
            state: RwLock::new(session),
            writer: tokio::sync::Mutex::new(()),
            inflight: Mutex::new(None),
            next_ticket: Mutex::new(0),
            events,
        }
    }

    pub fn read<T>(&self, f: impl FnOnce(&Session) -> T) -> T {
        f(&self.state.read().expect("session state poisoned"))
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Event> {
        self.events.subscribe()
    }

    /// Cancels whatever solve is running for this session and registers a
    /// fresh token for the caller.
    fn supersede(&self) -> (u64, CancelToken) {
        let ticket = {
            let mut t = self.next_ticket.lock().expect("ticket poisoned");
            *t += 1;
            *t
        };
        let token = CancelToken::new();
        let mut inflight = self.inflight.lock().expect("inflight poisoned");
        if let Some((_, previous)) = inflight.replace((ticket, token.clone())) {
            previous.cancel();
        }
        (ticket, token)
    }

    fn retire(&self, ticket: u64) {
        let mut inflight = self.inflight.lock().expect("inflight poisoned");
        if inflight.as_ref().is_some_and(|(t, _)| *t == ticket) {
            *inflight = None;
        }
    }

    /// Applies `op` to a copy of the session and publishes the result. The
    /// revision the mutation will produce is sent on `assigned` as soon as
    /// the writer slot is held. On error the session is untouched.
    pub async fn mutate<F>(self: Arc<Self>, op: F, assigned: oneshot::Sender<u64>) -> Outcome
    where
        F: FnOnce(&mut Session, CancelToken) -> Result<(), SessionError> + Send + 'static,
    {
        let (ticket, token) = self.supersede();
        let _writer = self.writer.lock().await;
        let mut draft = self.read(Session::clone);
        let _ = assigned.send(draft.revision() + 1);

        let worked =
            tokio::task::spawn_blocking(move || op(&mut draft, token).map(|_| draft)).await;
        self.retire(ticket);
        let draft = match worked {
            Ok(Ok(draft)) => draft,
            Ok(Err(e)) => return Outcome::Failed(e),
            Err(join) => std::panic::resume_unwind(join.into_panic()),
        };

        let mut state = self.state.write().expect("session state poisoned");
        *state = draft;
        let payload = LayoutPayload::of(&state);
        // Sent under the state lock so subscribers see revisions in order.
        let _ = self.events.send(Event {
            revision: payload.revision,
            payload: payload.clone(),
        });
        Outcome::Done(payload)
    }
}
