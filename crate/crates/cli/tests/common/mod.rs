#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::time::Duration;

use oli_cli::api::payload::{ItemPosition, LayoutPayload, OliRequest};
use oli_cli::{commands, ServerConfig};
use oli_core::ingest::{MatrixEncoding, Regime, SyntheticRegimeSpec, TaskVariant};
use serde_json::Value;
use tempfile::TempDir;

pub const DATASET: &str = "aligned";

/// A running server over a temporary data directory.
pub struct TestServer {
    pub addr: SocketAddr,
    pub client: reqwest::Client,
    _data: TempDir,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
    }
}

pub fn write_dataset(root: &Path, name: &str, regime: Regime, n: usize, d: usize) -> Vec<u8> {
    let spec = SyntheticRegimeSpec::new(regime, TaskVariant::LinearCombination, n, d).with_seed(7);
    commands::generate(&spec, MatrixEncoding::BinaryF32RowMajor, &root.join(name)).unwrap();
    let labels = std::fs::read_to_string(root.join(name).join("labels.json")).unwrap();
    serde_json::from_str(&labels).unwrap()
}

impl TestServer {
    pub async fn start() -> Self {
        Self::with_deadline(Duration::from_secs(10), 40).await
    }

    pub async fn with_deadline(deadline: Duration, n_items: usize) -> Self {
        let data = TempDir::new().unwrap();
        write_dataset(data.path(), DATASET, Regime::Aligned, n_items, 6);
        let mut config = ServerConfig::new(data.path());
        config.deadline = deadline;
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = tokio::sync::oneshot::channel();
        tokio::spawn(oli_cli::serve(listener, config, async {
            let _ = rx.await;
        }));
        TestServer {
            addr,
            client: reqwest::Client::new(),
            _data: data,
            shutdown: Some(tx),
        }
    }

    pub fn data_dir(&self) -> &Path {
        self._data.path()
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub fn ws_url(&self, path: &str) -> String {
        format!("ws://{}{path}", self.addr)
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.client.get(self.url(path)).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        let r = self
            .client
            .post(self.url(path))
            .json(body)
            .send()
            .await
            .unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn put(&self, path: &str, body: &Value) -> (u16, Value) {
        let r = self
            .client
            .put(self.url(path))
            .json(body)
            .send()
            .await
            .unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    /// Creates a session on the default dataset and returns its id and payload.
    pub async fn create_session(&self) -> (String, LayoutPayload) {
        let (status, body) = self
            .post("/sessions", &serde_json::json!({ "dataset": DATASET }))
            .await;
        assert_eq!(status, 201, "{body}");
        let id = body["session_id"].as_str().unwrap().to_string();
        let payload = serde_json::from_value(body["payload"].clone()).unwrap();
        (id, payload)
    }

    pub async fn payload(&self, id: &str) -> LayoutPayload {
        let (status, body) = self.get(&format!("/sessions/{id}")).await;
        assert_eq!(status, 200, "{body}");
        serde_json::from_value(body).unwrap()
    }
}

/// Pulls the first `per_side` items towards (-spread, 0) and the last
/// `per_side` items towards (spread, 0), fanned out by `phase`.
pub fn drag_request(payload: &LayoutPayload, per_side: usize, phase: f64) -> OliRequest {
    let n = payload.positions.len();
    let mut drags = Vec::new();
    for k in 0..per_side {
        let angle = phase + k as f64;
        for (item, cx) in [(k, -3.0), (n - 1 - k, 3.0)] {
            drags.push(ItemPosition {
                item_id: payload.positions[item].item_id.clone(),
                x: cx + 0.5 * angle.cos(),
                y: 0.5 * angle.sin(),
            });
        }
    }
    OliRequest { drags }
}

pub fn schema_validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(oli_cli::schema::PAYLOAD_SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

/// Validator for one of the schema's `$defs`, with `#` rebound to the
/// layout payload.
pub fn sub_validator(def: &str) -> jsonschema::Validator {
    let mut layout: Value = serde_json::from_str(oli_cli::schema::PAYLOAD_SCHEMA).unwrap();
    let defs = layout.as_object_mut().unwrap().remove("$defs").unwrap();
    layout.as_object_mut().unwrap().remove("$id");
    let body = serde_json::to_string(&defs[def])
        .unwrap()
        .replace(r##""$ref":"#""##, r##""$ref":"#/$defs/layout""##);
    let mut schema: Value = serde_json::from_str(&body).unwrap();
    schema["$defs"] = serde_json::json!({ "layout": layout });
    jsonschema::validator_for(&schema).unwrap()
}
