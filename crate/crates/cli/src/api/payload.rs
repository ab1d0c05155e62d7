use oli_core::session::{InteractionLogEntry, Session};
use oli_core::SolveReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPosition {
    pub item_id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub final_objective: f64,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        SolveSummary {
            converged: r.converged,
            iterations: r.iterations,
            final_objective: r.final_objective,
        }
    }
}

/// Current projection and weights of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPayload {
    pub revision: u64,
    pub positions: Vec<ItemPosition>,
    pub weights: Vec<f64>,
    pub solve: SolveSummary,
    /// Raised by the mutation that produced this revision.
    pub warnings: Vec<String>,
}

impl LayoutPayload {
    pub fn of(session: &Session) -> Self {
        let positions = session
            .features()
            .item_ids()
            .iter()
            .zip(session.layout().positions())
            .map(|(id, p)| ItemPosition {
                item_id: id.clone(),
                x: p[0],
                y: p[1],
            })
            .collect();
        LayoutPayload {
            revision: session.revision(),
            positions,
            weights: session.weights().as_slice().to_vec(),
            solve: SolveSummary::from(session.last_solve()),
            warnings: session
                .log()
                .last()
                .map(|e| e.reports.iter().flat_map(|r| r.warnings.clone()).collect())
                .unwrap_or_default(),
        }
    }
}

/// One push-channel message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub revision: u64,
    pub payload: LayoutPayload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub dataset: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub dataset: String,
    pub payload: LayoutPayload,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OliRequest {
    pub drags: Vec<ItemPosition>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightValue {
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureValues {
    pub item_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogResponse {
    pub revision: u64,
    pub interaction_cost: usize,
    pub entries: Vec<InteractionLogEntry>,
}

/// Body of a 202: the mutation was accepted but its solve outlived the
/// request deadline. The result arrives on the push channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pending {
    pub pending: bool,
    /// Revision the mutation will produce, once it holds the session.
    pub revision: Option<u64>,
    /// Revision current when the request was accepted.
    pub after_revision: u64,
}
