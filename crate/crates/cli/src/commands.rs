//! Offline commands behind the `oli` binary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use oli_core::ingest::{
    export_dataset, generate_synthetic, load_dataset, AbstractionLevel, DatasetMetadata,
    MatrixEncoding, SyntheticRegimeSpec,
};
use oli_core::sim::{run_grid, GridPlan, GridReport};
use oli_core::{wmds_solve, SolveReport, WeightVector};

use crate::registry::{DatasetSummary, Registry};

/// Accepts `uniform`, a JSON array, or numbers separated by commas or
/// whitespace.
pub fn parse_weights(text: &str, n_features: usize) -> Result<WeightVector> {
    let trimmed = text.trim();
    if trimmed.eq_ignore_ascii_case("uniform") {
        return Ok(WeightVector::uniform(n_features));
    }
    let raw: Vec<f64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).context("weights are not a JSON array of numbers")?
    } else {
        trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .with_context(|| format!("bad weight {t:?}"))
            })
            .collect::<Result<_>>()?
    };
    if raw.len() != n_features {
        bail!("expected {n_features} weights, found {}", raw.len());
    }
    Ok(WeightVector::from_raw(&raw)?)
}

/// Projects a dataset under fixed weights and writes `item_id,x,y` rows.
pub fn solve(manifest: &Path, weights: &str, out: &Path) -> Result<SolveReport> {
    let ds = load_dataset(manifest)?;
    let d = ds.features.n_features();
    let text = if weights.eq_ignore_ascii_case("uniform") {
        weights.to_string()
    } else {
        fs::read_to_string(weights).with_context(|| format!("reading weights {weights}"))?
    };
    let w = parse_weights(&text, d)?;
    let (layout, report) = wmds_solve(&ds.features, &w, None)?;
    let mut csv = String::from("item_id,x,y\n");
    for (id, p) in ds.features.item_ids().iter().zip(layout.positions()) {
        csv.push_str(&format!("{id},{},{}\n", p[0], p[1]));
    }
    fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    Ok(report)
}

/// Runs the grid described by `spec` (a JSON [`GridPlan`]) and writes
/// `results.csv`, `results.txt` and `results.json` into `out`.
pub fn simulate(spec: &Path, out: &Path) -> Result<GridReport> {
    let text =
        fs::read_to_string(spec).with_context(|| format!("reading spec {}", spec.display()))?;
    let plan: GridPlan =
        serde_json::from_str(&text).with_context(|| format!("parsing spec {}", spec.display()))?;
    let report = run_grid(&plan.cells());
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("results.csv"), report.to_csv())?;
    fs::write(out.join("results.txt"), report.to_table())?;
    fs::write(
        out.join("results.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

pub fn list_datasets(data_dir: &Path) -> Result<Vec<DatasetSummary>> {
    Registry::new(data_dir)
        .list()
        .with_context(|| format!("reading {}", data_dir.display()))
}

pub fn render_dataset_table(list: &[DatasetSummary]) -> String {
    let mut out = format!(
        "{:<24} {:>7} {:>9} {:<10} {}\n",
        "name", "items", "features", "level", "status"
    );
    for ds in list {
        match (&ds.info, &ds.error) {
            (Some(info), _) => out.push_str(&format!(
                "{:<24} {:>7} {:>9} {:<10} ok\n",
                ds.name,
                info.n_items,
                info.n_features,
                format!("{:?}", info.abstraction_level).to_lowercase()
            )),
            (None, e) => out.push_str(&format!(
                "{:<24} {:>7} {:>9} {:<10} invalid: {}\n",
                ds.name,
                "-",
                "-",
                "-",
                e.as_deref().unwrap_or("unknown error")
            )),
        }
    }
    out
}

/// Writes a synthetic dataset plus its `labels.json` into `out`.
pub fn generate(
    spec: &SyntheticRegimeSpec,
    encoding: MatrixEncoding,
    out: &Path,
) -> Result<PathBuf> {
    let ds = generate_synthetic(spec)?;
    let name = format!("synthetic-{}-{}", spec.regime.as_str(), spec.task.as_str());
    let meta = DatasetMetadata::new(name, AbstractionLevel::Synthetic).with_encoding(encoding);
    let manifest = export_dataset(&ds.features, &meta, out)?;
    fs::write(out.join("labels.json"), serde_json::to_string(&ds.labels)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_text_formats() {
        assert_eq!(
            parse_weights("uniform", 3).unwrap(),
            WeightVector::uniform(3)
        );
        let a = parse_weights("[1, 2, 3]", 3).unwrap();
        let b = parse_weights("1,2\n3\n", 3).unwrap();
        assert_eq!(a, b);
        assert!((a.mass() - 3.0).abs() < 1e-12);
        assert!(parse_weights("1 2", 3).is_err());
        assert!(parse_weights("1 x 3", 3).is_err());
        assert!(parse_weights("[-1, 1, 1]", 3).is_err());
    }
}
