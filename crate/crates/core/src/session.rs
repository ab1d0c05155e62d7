//! Stateful interaction loop for one analyst session.
//!
//! Drags are staged and only change the model on an explicit commit, which
//! learns new weights from the dragged items and re-projects. Slider edits
//! apply immediately. Every committed change appends to the log and bumps the
//! revision by one; replaying the log reproduces the session.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{load_dataset, IngestError};
use crate::math::{
    wmds_inverse, wmds_solve, wmds_solve_with, CancelToken, FeatureMatrix, ForwardOptions, Layout,
    MathError, SolveReport, WeightVector,
};

/// Share of the total weight mass given to a maximized feature.
pub const MAXIMIZE_SHARE: f64 = 0.9;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown item {0:?}")]
    UnknownItem(String),
    #[error("feature index {index} out of range for {n_features} features")]
    InvalidFeature { index: usize, n_features: usize },
    #[error("weight must be finite and nonnegative, got {0}")]
    InvalidWeight(f64),
    #[error("drag position for {0:?} is not finite")]
    NonFinitePosition(String),
    #[error("log entry {found} does not follow revision {expected}")]
    ReplayOutOfOrder { expected: u64, found: u64 },
    #[error(transparent)]
    Math(#[from] MathError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragEvent {
    pub item_id: String,
    pub new_position: [f64; 2],
}

impl DragEvent {
    pub fn new(item_id: impl Into<String>, x: f64, y: f64) -> Self {
        DragEvent {
            item_id: item_id.into(),
            new_position: [x, y],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightEdit {
    pub feature_index: usize,
    pub new_weight: f64,
}

/// Drags staged since the last commit, one per item (last one wins).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionBatch {
    drags: Vec<DragEvent>,
}

impl InteractionBatch {
    pub fn stage(&mut self, e: DragEvent) {
        match self.drags.iter_mut().find(|d| d.item_id == e.item_id) {
            Some(existing) => existing.new_position = e.new_position,
            None => self.drags.push(e),
        }
    }

    pub fn drags(&self) -> &[DragEvent] {
        &self.drags
    }

    pub fn len(&self) -> usize {
        self.drags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drags.is_empty()
    }

    fn take(&mut self) -> Vec<DragEvent> {
        std::mem::take(&mut self.drags)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogPayload {
    OliCommit { drags: Vec<DragEvent> },
    WeightEdit(WeightEdit),
    WeightMaximize { feature_index: usize },
    Reset,
}

impl LogPayload {
    /// Analyst interactions represented by this entry.
    pub fn cost(&self) -> usize {
        match self {
            LogPayload::OliCommit { drags } => drags.len(),
            LogPayload::WeightEdit(_) | LogPayload::WeightMaximize { .. } => 1,
            LogPayload::Reset => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionLogEntry {
    pub revision: u64,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub payload: LogPayload,
    /// Inverse solve (for commits) followed by the forward solve.
    pub reports: Vec<SolveReport>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct Session {
    session_id: String,
    dataset_ref: String,
    features: Arc<FeatureMatrix>,
    weights: WeightVector,
    layout: Layout,
    last_solve: SolveReport,
    staged: InteractionBatch,
    log: Vec<InteractionLogEntry>,
    revision: u64,
    initial: Arc<(Layout, SolveReport)>,
}

impl Session {
    /// Uniform weights and the default projection, at revision 0.
    pub fn create(
        session_id: impl Into<String>,
        dataset_ref: impl Into<String>,
        features: Arc<FeatureMatrix>,
    ) -> Result<Self, SessionError> {
        let weights = WeightVector::uniform(features.n_features());
        let (layout, report) = wmds_solve(&features, &weights, None)?;
        Ok(Session {
            session_id: session_id.into(),
            dataset_ref: dataset_ref.into(),
            features,
            weights,
            layout: layout.clone(),
            last_solve: report.clone(),
            staged: InteractionBatch::default(),
            log: Vec::new(),
            revision: 0,
            initial: Arc::new((layout, report)),
        })
    }

    /// Loads the dataset behind `manifest_path` and opens a session on it.
    pub fn from_manifest(
        session_id: impl Into<String>,
        manifest_path: impl AsRef<Path>,
    ) -> Result<Self, SessionError> {
        let path = manifest_path.as_ref();
        let dataset = load_dataset(path)?;
        Session::create(
            session_id,
            path.display().to_string(),
            Arc::new(dataset.features),
        )
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn dataset_ref(&self) -> &str {
        &self.dataset_ref
    }

    pub fn features(&self) -> &Arc<FeatureMatrix> {
        &self.features
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn last_solve(&self) -> &SolveReport {
        &self.last_solve
    }

    pub fn staged(&self) -> &InteractionBatch {
        &self.staged
    }

    pub fn log(&self) -> &[InteractionLogEntry] {
        &self.log
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    fn item_index(&self, item_id: &str) -> Result<usize, SessionError> {
        self.features
            .index_of(item_id)
            .ok_or_else(|| SessionError::UnknownItem(item_id.to_string()))
    }

    fn check_feature(&self, index: usize) -> Result<(), SessionError> {
        let n_features = self.features.n_features();
        if index >= n_features {
            return Err(SessionError::InvalidFeature { index, n_features });
        }
        Ok(())
    }

    /// Checks a drag without staging it.
    pub fn validate_drag(&self, e: &DragEvent) -> Result<(), SessionError> {
        self.item_index(&e.item_id)?;
        if !e.new_position.iter().all(|c| c.is_finite()) {
            return Err(SessionError::NonFinitePosition(e.item_id.clone()));
        }
        Ok(())
    }

    pub fn validate_weight_edit(&self, e: &WeightEdit) -> Result<(), SessionError> {
        self.check_feature(e.feature_index)?;
        if !e.new_weight.is_finite() || e.new_weight < 0.0 {
            return Err(SessionError::InvalidWeight(e.new_weight));
        }
        Ok(())
    }

    pub fn validate_feature(&self, index: usize) -> Result<(), SessionError> {
        self.check_feature(index)
    }

    /// Stages a drag. Layout, weights and revision are untouched.
    pub fn stage_drag(&mut self, e: DragEvent) -> Result<(), SessionError> {
        self.validate_drag(&e)?;
        self.staged.stage(e);
        Ok(())
    }

    pub fn clear_staged(&mut self) {
        self.staged = InteractionBatch::default();
    }

    fn record(&mut self, payload: LogPayload, reports: Vec<SolveReport>) {
        self.revision += 1;
        self.log.push(InteractionLogEntry {
            revision: self.revision,
            timestamp_ms: now_ms(),
            payload,
            reports,
        });
    }

    /// Re-projects under `weights`, warm-started from the current layout and
    /// aligned onto it through `anchors`.
    fn reproject(
        &self,
        weights: &WeightVector,
        init: Layout,
        anchors: Option<Vec<usize>>,
        cancel: Option<CancelToken>,
    ) -> Result<(Layout, SolveReport), SessionError> {
        let opts = ForwardOptions {
            init: Some(init),
            anchors,
            cancel,
            ..ForwardOptions::default()
        };
        Ok(wmds_solve_with(&self.features, weights, &opts)?)
    }

    pub fn commit_oli(&mut self) -> Result<(), SessionError> {
        self.commit_oli_with(None)
    }

    /// Learns weights from the staged drags, then re-projects. The inverse
    /// solve always runs to completion; `cancel` only cuts the forward solve
    /// short, so learned weights never depend on timing.
    pub fn commit_oli_with(&mut self, cancel: Option<CancelToken>) -> Result<(), SessionError> {
        if self.staged.len() < 2 {
            return Err(MathError::InsufficientPairs(self.staged.len()).into());
        }
        let mut moved = BTreeMap::new();
        for d in self.staged.drags() {
            moved.insert(self.item_index(&d.item_id)?, d.new_position);
        }
        let (weights, inverse_report) = wmds_inverse(&self.features, &self.weights, &moved)?;

        let mut init = self.layout.clone();
        let mut positions = init.positions().to_vec();
        for (&i, &p) in &moved {
            positions[i] = p;
        }
        init = Layout::new(positions)?;
        let unmoved: Vec<usize> = (0..self.features.n_items())
            .filter(|i| !moved.contains_key(i))
            .collect();
        let anchors = (unmoved.len() >= 2).then_some(unmoved);
        let (layout, forward_report) = self.reproject(&weights, init, anchors, cancel)?;

        let drags = self.staged.take();
        self.weights = weights;
        self.layout = layout;
        self.last_solve = forward_report.clone();
        self.record(
            LogPayload::OliCommit { drags },
            vec![inverse_report, forward_report],
        );
        Ok(())
    }

    fn apply_weights(
        &mut self,
        weights: WeightVector,
        payload: LogPayload,
        cancel: Option<CancelToken>,
    ) -> Result<(), SessionError> {
        let (layout, report) = self.reproject(&weights, self.layout.clone(), None, cancel)?;
        self.weights = weights;
        self.layout = layout;
        self.last_solve = report.clone();
        self.record(payload, vec![report]);
        Ok(())
    }

    pub fn apply_weight_edit(&mut self, e: WeightEdit) -> Result<(), SessionError> {
        self.apply_weight_edit_with(e, None)
    }

    /// Sets one weight, restores the mass invariant and re-projects.
    pub fn apply_weight_edit_with(
        &mut self,
        e: WeightEdit,
        cancel: Option<CancelToken>,
    ) -> Result<(), SessionError> {
        self.validate_weight_edit(&e)?;
        let mut raw = self.weights.as_slice().to_vec();
        raw[e.feature_index] = e.new_weight;
        let weights = WeightVector::from_raw(&raw)?;
        self.apply_weights(weights, LogPayload::WeightEdit(e), cancel)
    }

    pub fn maximize_weight(&mut self, feature_index: usize) -> Result<(), SessionError> {
        self.maximize_weight_with(feature_index, None)
    }

    /// Gives one feature [`MAXIMIZE_SHARE`] of the mass and splits the rest
    /// evenly.
    pub fn maximize_weight_with(
        &mut self,
        feature_index: usize,
        cancel: Option<CancelToken>,
    ) -> Result<(), SessionError> {
        self.check_feature(feature_index)?;
        let d = self.features.n_features();
        let weights = if d == 1 {
            self.weights.clone()
        } else {
            let mass = d as f64;
            let rest = (1.0 - MAXIMIZE_SHARE) * mass / (d - 1) as f64;
            let mut w = vec![rest; d];
            w[feature_index] = MAXIMIZE_SHARE * mass;
            WeightVector::from_feasible_unchecked(w)
        };
        self.apply_weights(
            weights,
            LogPayload::WeightMaximize { feature_index },
            cancel,
        )
    }

    /// Back to uniform weights and the initial projection.
    pub fn reset(&mut self) {
        let (layout, report) = &*self.initial;
        self.weights = WeightVector::uniform(self.features.n_features());
        self.layout = layout.clone();
        self.last_solve = report.clone();
        self.staged = InteractionBatch::default();
        self.record(LogPayload::Reset, vec![report.clone()]);
    }

    pub fn item_feature_values(&self, item_id: &str) -> Result<&[f64], SessionError> {
        Ok(self.features.row(self.item_index(item_id)?))
    }

    /// Dragged items plus slider edits over the whole log. Resets are free.
    pub fn interaction_cost(&self) -> usize {
        self.log.iter().map(|e| e.payload.cost()).sum()
    }

    /// Rebuilds a session by re-running `log` from a fresh start.
    pub fn replay(
        session_id: impl Into<String>,
        dataset_ref: impl Into<String>,
        features: Arc<FeatureMatrix>,
        log: &[InteractionLogEntry],
    ) -> Result<Self, SessionError> {
        let mut s = Session::create(session_id, dataset_ref, features)?;
        for entry in log {
            if entry.revision != s.revision + 1 {
                return Err(SessionError::ReplayOutOfOrder {
                    expected: s.revision,
                    found: entry.revision,
                });
            }
            match &entry.payload {
                LogPayload::OliCommit { drags } => {
                    s.clear_staged();
                    for d in drags {
                        s.stage_drag(d.clone())?;
                    }
                    s.commit_oli()?;
                }
                LogPayload::WeightEdit(e) => s.apply_weight_edit(*e)?,
                LogPayload::WeightMaximize { feature_index } => {
                    s.maximize_weight(*feature_index)?
                }
                LogPayload::Reset => s.reset(),
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_session() -> Session {
        let values = vec![
            0.0, 0.1, 0.9, //
            0.2, 0.8, 0.4, //
            0.5, 0.5, 0.5, //
            0.9, 0.3, 0.0, //
            1.0, 1.0, 1.0, //
            0.4, 0.0, 0.7,
        ];
        let ids = (0..6).map(|i| format!("i{i}")).collect();
        let f = FeatureMatrix::new(6, 3, values, ids).unwrap();
        Session::create("s", "mem", Arc::new(f)).unwrap()
    }

    #[test]
    fn staging_dedups_by_item() {
        let mut s = small_session();
        let before = s.layout().clone();
        s.stage_drag(DragEvent::new("i1", 0.0, 0.0)).unwrap();
        s.stage_drag(DragEvent::new("i1", 2.0, 3.0)).unwrap();
        assert_eq!(s.staged().len(), 1);
        assert_eq!(s.staged().drags()[0].new_position, [2.0, 3.0]);
        assert_eq!(s.layout(), &before);
        assert_eq!(s.revision(), 0);
    }

    #[test]
    fn unknown_items_are_rejected() {
        let mut s = small_session();
        assert!(matches!(
            s.stage_drag(DragEvent::new("nope", 0.0, 0.0)),
            Err(SessionError::UnknownItem(_))
        ));
        assert!(s.item_feature_values("nope").is_err());
    }

    #[test]
    fn empty_commit_is_insufficient() {
        let mut s = small_session();
        assert!(matches!(
            s.commit_oli(),
            Err(SessionError::Math(MathError::InsufficientPairs(0)))
        ));
        assert_eq!(s.revision(), 0);
    }

    #[test]
    fn maximize_sets_dominant_share() {
        let mut s = small_session();
        s.maximize_weight(2).unwrap();
        let w = s.weights().as_slice();
        assert!((w[2] - 0.9 * 3.0).abs() < 1e-12);
        assert!((w[0] - 0.15).abs() < 1e-12 && (w[1] - 0.15).abs() < 1e-12);
        s.maximize_weight(0).unwrap();
        assert_eq!(s.weights().argmax(), 0);
        assert_eq!(s.revision(), 2);
    }

    #[test]
    fn negative_weight_is_rejected() {
        let mut s = small_session();
        let e = WeightEdit {
            feature_index: 0,
            new_weight: -1.0,
        };
        assert!(matches!(
            s.apply_weight_edit(e),
            Err(SessionError::InvalidWeight(_))
        ));
        let e = WeightEdit {
            feature_index: 3,
            new_weight: 1.0,
        };
        assert!(matches!(
            s.apply_weight_edit(e),
            Err(SessionError::InvalidFeature { .. })
        ));
        assert_eq!(s.revision(), 0);
    }

    #[test]
    fn costs_add_up_and_resets_are_free() {
        let mut s = small_session();
        for (k, id) in ["i0", "i1", "i2"].iter().enumerate() {
            s.stage_drag(DragEvent::new(*id, k as f64, 0.0)).unwrap();
        }
        s.commit_oli().unwrap();
        s.apply_weight_edit(WeightEdit {
            feature_index: 1,
            new_weight: 2.0,
        })
        .unwrap();
        assert_eq!(s.interaction_cost(), 4);
        s.reset();
        assert_eq!(s.interaction_cost(), 4);
        assert_eq!(s.revision(), 3);
    }

    #[test]
    fn log_entries_serialize_with_kind_tag() {
        let mut s = small_session();
        s.maximize_weight(1).unwrap();
        let v = serde_json::to_value(&s.log()[0]).unwrap();
        assert_eq!(v["kind"], "weight_maximize");
        assert_eq!(v["feature_index"], 1);
        assert_eq!(v["revision"], 1);
    }
}
