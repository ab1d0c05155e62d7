use std::fmt::Write as _;
use std::thread;

use serde::{Deserialize, Serialize};

use super::{
    run_experiment, Completeness, Cost, DataSource, ExperimentResult, ExperimentSpec, SimError,
    SuccessMetric,
};
use crate::ingest::{Regime, SyntheticRegimeSpec, TaskVariant};

/// One experiment in a grid, labelled by its regime and task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub regime: Regime,
    pub task: TaskVariant,
    pub experiment: ExperimentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub regime: Regime,
    pub task: TaskVariant,
    /// `None` when the cell raised an error; see `error`.
    pub result: Option<ExperimentResult>,
    pub error: Option<String>,
}

impl GridRow {
    /// Errored cells count as failed.
    pub fn completeness(&self) -> Completeness {
        self.result
            .as_ref()
            .map_or(Completeness::Failed, |r| r.completeness)
    }

    pub fn cost(&self) -> Cost {
        self.result.as_ref().map_or(Cost::Infinite, |r| r.cost)
    }

    pub fn rounds(&self) -> usize {
        self.result.as_ref().map_or(0, |r| r.rounds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
}

impl GridReport {
    pub fn row(&self, regime: Regime, task: TaskVariant) -> Option<&GridRow> {
        self.rows
            .iter()
            .find(|r| r.regime == regime && r.task == task)
    }

    /// `regime,task,completeness,cost,rounds` with a header line. Cells that
    /// raised an error are reported as failed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("regime,task,completeness,cost,rounds\n");
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                row.regime.as_str(),
                row.task.as_str(),
                row.completeness().as_str(),
                row.cost(),
                row.rounds()
            )
            .expect("writing to a String");
        }
        out
    }

    /// A regime-by-task table of completeness and cost.
    pub fn to_table(&self) -> String {
        let width = 22;
        let mut out = format!("{:<12}", "");
        for t in TaskVariant::ALL {
            write!(out, "{:<width$}", t.as_str()).unwrap();
        }
        out.push('\n');
        for regime in Regime::ALL {
            write!(out, "{:<12}", regime.as_str()).unwrap();
            for task in TaskVariant::ALL {
                let cell = match self.row(regime, task) {
                    Some(GridRow {
                        result: Some(r), ..
                    }) => format!("{} ({})", r.completeness.as_str(), r.cost),
                    Some(_) => "failed (error)".to_string(),
                    None => "-".to_string(),
                };
                write!(out, "{cell:<width$}").unwrap();
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}

/// A regime-by-task grid sharing one dataset size, seed and analyst
/// configuration. Every field has a default, so `{}` describes the full
/// 3x3 grid at 100 items and 16 features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridPlan {
    pub regimes: Vec<Regime>,
    pub tasks: Vec<TaskVariant>,
    pub n_items: usize,
    pub n_features: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub drags_per_round: usize,
    pub interaction_cap: usize,
    pub success_metric: SuccessMetric,
    pub success_threshold: f64,
}

impl Default for GridPlan {
    fn default() -> Self {
        let base = ExperimentSpec::synthetic(SyntheticRegimeSpec::new(
            Regime::Aligned,
            TaskVariant::default(),
            100,
            16,
        ));
        let DataSource::Synthetic(data) = &base.dataset else {
            unreachable!("synthetic constructor")
        };
        GridPlan {
            regimes: Regime::ALL.to_vec(),
            tasks: TaskVariant::ALL.to_vec(),
            n_items: data.n_items,
            n_features: data.n_features,
            noise_sigma: data.noise_sigma,
            seed: data.seed,
            drags_per_round: base.drags_per_round,
            interaction_cap: base.interaction_cap,
            success_metric: base.success_metric,
            success_threshold: base.success_threshold,
        }
    }
}

impl GridPlan {
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::new();
        for &regime in &self.regimes {
            for &task in &self.tasks {
                let data = SyntheticRegimeSpec::new(regime, task, self.n_items, self.n_features)
                    .with_noise(self.noise_sigma)
                    .with_seed(self.seed);
                let mut experiment = ExperimentSpec::synthetic(data);
                experiment.drags_per_round = self.drags_per_round;
                experiment.interaction_cap = self.interaction_cap;
                experiment.success_metric = self.success_metric;
                experiment.success_threshold = self.success_threshold;
                cells.push(GridCell {
                    regime,
                    task,
                    experiment,
                });
            }
        }
        cells
    }
}

/// Every regime crossed with every task at 100 items and 16 features.
pub fn default_grid() -> Vec<GridCell> {
    GridPlan::default().cells()
}

/// Runs every cell on its own thread. An error in one cell is recorded in
/// its row and does not affect the others.
pub fn run_grid(cells: &[GridCell]) -> GridReport {
    let results: Vec<Result<ExperimentResult, SimError>> = thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|cell| scope.spawn(|| run_experiment(&cell.experiment)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(SimError::InvalidSpec("experiment panicked".into())))
            })
            .collect()
    });
    let rows = cells
        .iter()
        .zip(results)
        .map(|(cell, result)| {
            let (result, error) = match result {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            GridRow {
                regime: cell.regime,
                task: cell.task,
                result,
                error,
            }
        })
        .collect();
    GridReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan_is_the_default_grid() {
        let plan: GridPlan = serde_json::from_str("{}").unwrap();
        assert_eq!(plan.cells(), default_grid());
        assert_eq!(plan.cells().len(), 9);
    }

    #[test]
    fn plan_overrides_reach_every_cell() {
        let plan: GridPlan =
            serde_json::from_str(r#"{"regimes": ["entangled"], "seed": 3, "interaction_cap": 12}"#)
                .unwrap();
        let cells = plan.cells();
        assert_eq!(cells.len(), 3);
        for c in cells {
            assert_eq!(c.regime, Regime::Entangled);
            assert_eq!(c.experiment.interaction_cap, 12);
            let DataSource::Synthetic(d) = &c.experiment.dataset else {
                panic!("synthetic cell expected")
            };
            assert_eq!((d.seed, d.task), (3, c.task));
        }
        assert!(serde_json::from_str::<GridPlan>(r#"{"sed": 3}"#).is_err());
    }

    #[test]
    fn table_lists_every_regime() {
        let report = GridReport { rows: vec![] };
        let table = report.to_table();
        assert!(table.contains("linear_combination"));
        assert_eq!(table.lines().count(), 4);
    }
}
