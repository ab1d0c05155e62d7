//! Datasets on disk: every immediate subdirectory of the data directory that
//! holds a `manifest.json` is a dataset named after the subdirectory.

use std::fs;
use std::path::{Path, PathBuf};

use oli_core::ingest::{read_manifest, AbstractionLevel, DatasetManifest, MANIFEST_FILE};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct Registry {
    root: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    /// `None` when the manifest does not parse or validate.
    pub info: Option<DatasetInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub title: String,
    pub n_items: usize,
    pub n_features: usize,
    pub abstraction_level: AbstractionLevel,
    pub has_thumbnails: bool,
}

impl From<&DatasetManifest> for DatasetInfo {
    fn from(m: &DatasetManifest) -> Self {
        DatasetInfo {
            title: m.name.clone(),
            n_items: m.n_items,
            n_features: m.n_features,
            abstraction_level: m.abstraction_level,
            has_thumbnails: m.thumbnail_paths.is_some(),
        }
    }
}

/// Dataset names are single path components.
fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && !name.contains(['/', '\\'])
        && !name.starts_with('.')
}

impl Registry {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Registry { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Manifest path for `name`, if such a dataset exists.
    pub fn manifest_path(&self, name: &str) -> Option<PathBuf> {
        if !valid_name(name) {
            return None;
        }
        let path = self.root.join(name).join(MANIFEST_FILE);
        path.is_file().then_some(path)
    }

    /// All datasets, sorted by name. A missing data directory is empty.
    pub fn list(&self) -> std::io::Result<Vec<DatasetSummary>> {
        let entries = match fs::read_dir(&self.root) {
            Ok(entries) => entries,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let mut out = Vec::new();
        for entry in entries {
            let entry = entry?;
            let Some(name) = entry.file_name().to_str().map(str::to_owned) else {
                continue;
            };
            let Some(path) = self.manifest_path(&name) else {
                continue;
            };
            let summary = match read_manifest(&path) {
                Ok(m) => DatasetSummary {
                    name,
                    info: Some(DatasetInfo::from(&m)),
                    error: None,
                },
                Err(e) => DatasetSummary {
                    name,
                    info: None,
                    error: Some(e.to_string()),
                },
            };
            out.push(summary);
        }
        out.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(out)
    }

    /// File behind a thumbnail path, only if the dataset's manifest lists it.
    pub fn thumbnail(&self, name: &str, relative: &str) -> Option<PathBuf> {
        let manifest = read_manifest(self.manifest_path(name)?).ok()?;
        manifest
            .thumbnail_paths?
            .iter()
            .any(|p| p == relative)
            .then(|| self.root.join(name).join(relative))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_single_components() {
        for bad in ["", ".", "..", "a/b", "..\\x", ".hidden"] {
            assert!(!valid_name(bad), "{bad:?}");
        }
        assert!(valid_name("stl10-high"));
    }

    #[test]
    fn missing_root_lists_nothing() {
        let r = Registry::new("/definitely/not/here");
        assert!(r.list().unwrap().is_empty());
        assert!(r.manifest_path("x").is_none());
    }
}
