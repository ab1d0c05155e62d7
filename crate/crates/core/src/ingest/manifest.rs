use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::IngestError;
use crate::math::{normalize_features, FeatureMatrix, MathError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MAX_FEATURES: usize = 65536;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstractionLevel {
    Low,
    Mid,
    High,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MatrixEncoding {
    #[serde(rename = "csv")]
    Csv,
    #[default]
    #[serde(rename = "binary-f32-row-major")]
    BinaryF32RowMajor,
}

/// On-disk description of a feature file. Field names are part of the
/// exchange format with external extractors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub n_items: usize,
    pub n_features: usize,
    pub abstraction_level: AbstractionLevel,
    pub item_ids: Vec<String>,
    #[serde(default)]
    pub thumbnail_paths: Option<Vec<String>>,
    pub matrix_path: String,
    pub matrix_encoding: MatrixEncoding,
    pub checksum: String,
}

/// The parts of a manifest that are not derived from the matrix itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMetadata {
    pub name: String,
    pub abstraction_level: AbstractionLevel,
    pub thumbnail_paths: Option<Vec<String>>,
    pub encoding: MatrixEncoding,
}

impl DatasetMetadata {
    pub fn new(name: impl Into<String>, abstraction_level: AbstractionLevel) -> Self {
        DatasetMetadata {
            name: name.into(),
            abstraction_level,
            thumbnail_paths: None,
            encoding: MatrixEncoding::default(),
        }
    }

    pub fn with_encoding(mut self, encoding: MatrixEncoding) -> Self {
        self.encoding = encoding;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    /// Directory holding the manifest; matrix and thumbnail paths resolve
    /// against it.
    pub root: PathBuf,
    pub features: FeatureMatrix,
}

impl Dataset {
    pub fn thumbnail_path(&self, relative: &str) -> Option<PathBuf> {
        let listed = self.manifest.thumbnail_paths.as_ref()?;
        listed
            .iter()
            .any(|p| p == relative)
            .then(|| self.root.join(relative))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn validate_manifest(m: &DatasetManifest) -> Result<(), IngestError> {
    if m.n_items < 2 {
        return Err(IngestError::Invalid(format!(
            "dataset needs at least 2 items, manifest declares {}",
            m.n_items
        )));
    }
    if m.n_features == 0 || m.n_features > MAX_FEATURES {
        return Err(IngestError::Invalid(format!(
            "n_features must be in 1..={MAX_FEATURES}, got {}",
            m.n_features
        )));
    }
    if m.item_ids.len() != m.n_items {
        return Err(IngestError::Dimension {
            what: "item_ids length",
            expected: m.n_items,
            found: m.item_ids.len(),
        });
    }
    if let Some(thumbs) = &m.thumbnail_paths {
        if thumbs.len() != m.n_items {
            return Err(IngestError::Dimension {
                what: "thumbnail_paths length",
                expected: m.n_items,
                found: thumbs.len(),
            });
        }
        if let Some(bad) = thumbs
            .iter()
            .find(|p| Path::new(p).is_absolute() || p.split('/').any(|c| c == ".."))
        {
            return Err(IngestError::Invalid(format!(
                "thumbnail path {bad:?} must be relative to the manifest"
            )));
        }
    }
    Ok(())
}

fn parse_csv(text: &str, n_features: usize) -> Result<Vec<Vec<f64>>, IngestError> {
    let mut rows = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .enumerate()
            .map(|(column, field)| {
                field.trim().parse::<f64>().map_err(|_| {
                    IngestError::Invalid(format!(
                        "row {row}, column {column}: cannot parse {field:?}"
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != n_features {
            return Err(IngestError::Dimension {
                what: "columns in matrix row",
                expected: n_features,
                found: values.len(),
            });
        }
        rows.push(values);
    }
    Ok(rows)
}

fn parse_binary(bytes: &[u8], n_features: usize) -> Result<Vec<Vec<f64>>, IngestError> {
    let row_bytes = 4 * n_features;
    if !bytes.len().is_multiple_of(row_bytes) {
        return Err(IngestError::Invalid(format!(
            "binary matrix length {} is not a multiple of the row size {row_bytes}",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(row_bytes)
        .map(|row| {
            row.chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect()
        })
        .collect())
}

/// Parses and validates a manifest without touching the matrix file.
pub fn read_manifest(manifest_path: impl AsRef<Path>) -> Result<DatasetManifest, IngestError> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| IngestError::io(manifest_path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|source| IngestError::Manifest {
            path: manifest_path.to_path_buf(),
            source,
        })?;
    validate_manifest(&manifest)?;
    Ok(manifest)
}

/// Reads a manifest, verifies the matrix checksum and shape, and returns the
/// normalized features.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Dataset, IngestError> {
    let manifest_path = manifest_path.as_ref();
    let manifest = read_manifest(manifest_path)?;

    let root = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let matrix_path = root.join(&manifest.matrix_path);
    let bytes = fs::read(&matrix_path).map_err(|e| IngestError::io(&matrix_path, e))?;
    let found = sha256_hex(&bytes);
    if !found.eq_ignore_ascii_case(&manifest.checksum) {
        return Err(IngestError::Checksum {
            path: matrix_path,
            expected: manifest.checksum.clone(),
            found,
        });
    }

    let rows = match manifest.matrix_encoding {
        MatrixEncoding::Csv => {
            let text = String::from_utf8(bytes)
                .map_err(|_| IngestError::Invalid("csv matrix is not valid UTF-8".into()))?;
            parse_csv(&text, manifest.n_features)?
        }
        MatrixEncoding::BinaryF32RowMajor => parse_binary(&bytes, manifest.n_features)?,
    };
    if rows.len() != manifest.n_items {
        return Err(IngestError::Dimension {
            what: "matrix rows",
            expected: manifest.n_items,
            found: rows.len(),
        });
    }
    let features = normalize_features(&rows, manifest.item_ids.clone()).map_err(|e| match e {
        MathError::NonFinite { row, column } => IngestError::NonFinite { row, column },
        other => IngestError::Math(other),
    })?;
    Ok(Dataset {
        manifest,
        root,
        features,
    })
}

/// Writes `f` as a matrix file plus manifest into `dir` and returns the
/// manifest path. Loading the result reproduces a normalized matrix exactly.
pub fn export_dataset(
    f: &FeatureMatrix,
    metadata: &DatasetMetadata,
    dir: impl AsRef<Path>,
) -> Result<PathBuf, IngestError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let (matrix_name, bytes) = match metadata.encoding {
        MatrixEncoding::Csv => {
            let mut text = String::new();
            for row in f.rows() {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                text.push_str(&line.join(","));
                text.push('\n');
            }
            ("matrix.csv", text.into_bytes())
        }
        MatrixEncoding::BinaryF32RowMajor => {
            let bytes = f
                .values()
                .iter()
                .flat_map(|&v| (v as f32).to_le_bytes())
                .collect();
            ("matrix.f32", bytes)
        }
    };
    let matrix_path = dir.join(matrix_name);
    fs::write(&matrix_path, &bytes).map_err(|e| IngestError::io(&matrix_path, e))?;

    let manifest = DatasetManifest {
        name: metadata.name.clone(),
        n_items: f.n_items(),
        n_features: f.n_features(),
        abstraction_level: metadata.abstraction_level,
        item_ids: f.item_ids().to_vec(),
        thumbnail_paths: metadata.thumbnail_paths.clone(),
        matrix_path: matrix_name.to_string(),
        matrix_encoding: metadata.encoding,
        checksum: sha256_hex(&bytes),
    };
    validate_manifest(&manifest)?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text).map_err(|e| IngestError::io(&manifest_path, e))?;
    Ok(manifest_path)
}
