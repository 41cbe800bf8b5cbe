//! Labeled activation datasets: validation, bit-exact binary IO, and
//! deterministic balanced splitting.
//!
//! # File format
//!
//! Activation file (little-endian):
//! - magic `"SAPR"` (4 bytes)
//! - version `u8` (= 1)
//! - `n_examples: u32`, `d_model: u32`
//! - `n_examples * d_model` row-major `f32` activations
//! - `n_examples` label bytes (0 or 1)
//!
//! A JSON sidecar `<path>.meta.json` holds the metadata record verbatim.

use std::fs;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::MatrixF32;
use crate::rng::seeded_rng;

pub const ACTIVATION_MAGIC: [u8; 4] = *b"SAPR";
pub const ACTIVATION_VERSION: u8 = 1;

/// Provenance of an activation dataset: where in the source model the
/// vectors were sampled and under which prompt convention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub dataset_name: String,
    pub model_id: String,
    pub layer: u32,
    pub hook_point: String,
    pub token_position: String,
}

impl DatasetMeta {
    /// Metadata for synthetic activations that never touched a model.
    pub fn synthetic(dataset_name: &str) -> Self {
        DatasetMeta {
            dataset_name: dataset_name.to_string(),
            model_id: "synthetic".to_string(),
            layer: 0,
            hook_point: "planted".to_string(),
            token_position: "last".to_string(),
        }
    }
}

/// Matrix of per-example activation vectors with binary answerability
/// labels (1 = answerable). Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationDataset {
    data: MatrixF32,
    labels: Vec<u8>,
    meta: DatasetMeta,
}

impl ActivationDataset {
    /// Checks the dataset invariants: label count matches the row count,
    /// labels are 0/1, and the activation width is positive.
    pub fn new(data: MatrixF32, labels: Vec<u8>, meta: DatasetMeta) -> Result<Self> {
        if labels.len() != data.rows() {
            return Err(Error::Validation(format!(
                "{} labels for {} rows",
                labels.len(),
                data.rows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Validation(format!("label {bad} is not 0 or 1")));
        }
        if data.cols() == 0 {
            return Err(Error::Validation("d_model must be positive".to_string()));
        }
        Ok(ActivationDataset { data, labels, meta })
    }

    pub fn n_examples(&self) -> usize {
        self.data.rows()
    }

    pub fn d_model(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &MatrixF32 {
        &self.data
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn row(&self, i: usize) -> &[f32] {
        self.data.row(i)
    }

    /// Counts of (label 0, label 1) examples.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    /// Sub-dataset containing the given rows, keeping the metadata.
    pub fn subset(&self, indices: &[usize]) -> ActivationDataset {
        ActivationDataset {
            data: self.data.gather_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            meta: self.meta.clone(),
        }
    }
}

/// How to carve a train split out of a dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_count: usize,
    pub seed: u64,
    /// When set, the train split has equal counts per label class.
    pub balanced: bool,
}

fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    std::path::PathBuf::from(s)
}

/// Write a dataset and its metadata sidecar. Non-finite activations are
/// rejected.
pub fn write_dataset(ds: &ActivationDataset, path: &Path) -> Result<()> {
    if !ds.data.is_finite() {
        return Err(Error::Validation(
            "dataset contains non-finite activations".to_string(),
        ));
    }
    let n = ds.n_examples();
    let d = ds.d_model();
    let mut bytes = Vec::with_capacity(4 + 1 + 8 + n * d * 4 + n);
    bytes.extend_from_slice(&ACTIVATION_MAGIC);
    bytes.push(ACTIVATION_VERSION);
    bytes.extend_from_slice(&u32::try_from(n).map_err(|_| {
        Error::Capacity(format!("{n} examples exceed the u32 header field"))
    })?.to_le_bytes());
    bytes.extend_from_slice(&u32::try_from(d).map_err(|_| {
        Error::Capacity(format!("d_model {d} exceeds the u32 header field"))
    })?.to_le_bytes());
    for v in ds.data.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&ds.labels);
    fs::write(path, &bytes).map_err(|e| Error::storage(path, e))?;

    let meta_json = serde_json::to_string_pretty(&ds.meta)
        .expect("meta serialization cannot fail");
    fs::write(meta_path(path), meta_json).map_err(|e| Error::storage(path, e))?;
    Ok(())
}

/// Load a dataset written by [`write_dataset`].
pub fn load_dataset(path: &Path) -> Result<ActivationDataset> {
    let bytes = fs::read(path).map_err(|e| Error::storage(path, e))?;
    let mut cursor = bytes.as_slice();

    let mut magic = [0u8; 4];
    read_chunk(&mut cursor, &mut magic, "magic")?;
    if magic != ACTIVATION_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {ACTIVATION_MAGIC:?}"
        )));
    }
    let mut version = [0u8; 1];
    read_chunk(&mut cursor, &mut version, "version")?;
    if version[0] != ACTIVATION_VERSION {
        return Err(Error::Format(format!(
            "unsupported activation file version {}",
            version[0]
        )));
    }
    let n = read_u32(&mut cursor, "n_examples")? as usize;
    let d = read_u32(&mut cursor, "d_model")? as usize;
    if d == 0 {
        return Err(Error::Corruption("d_model is zero".to_string()));
    }

    let mut data = Vec::with_capacity(n * d);
    let mut buf = [0u8; 4];
    for _ in 0..n * d {
        read_chunk(&mut cursor, &mut buf, "activation data")?;
        data.push(f32::from_le_bytes(buf));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation(
            "dataset contains non-finite activations".to_string(),
        ));
    }

    let mut labels = vec![0u8; n];
    read_chunk(&mut cursor, &mut labels, "labels")?;
    if !cursor.is_empty() {
        return Err(Error::Corruption(format!(
            "{} trailing bytes after labels",
            cursor.len()
        )));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Corruption("label byte is not 0 or 1".to_string()));
    }

    let meta_file = meta_path(path);
    let meta_json = fs::read_to_string(&meta_file).map_err(|e| Error::storage(&meta_file, e))?;
    let meta: DatasetMeta = serde_json::from_str(&meta_json)
        .map_err(|e| Error::Format(format!("bad meta sidecar: {e}")))?;

    ActivationDataset::new(MatrixF32::from_vec(n, d, data)?, labels, meta)
}

fn read_chunk(cursor: &mut &[u8], buf: &mut [u8], what: &str) -> Result<()> {
    cursor
        .read_exact(buf)
        .map_err(|_| Error::Corruption(format!("truncated while reading {what}")))
}

fn read_u32(cursor: &mut &[u8], what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_chunk(cursor, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

/// Select train indices from labels: a seeded permutation per label class,
/// then prefixes. Returns sorted train indices.
pub(crate) fn select_train_indices(
    labels: &[u8],
    train_count: usize,
    seed: u64,
    balanced: bool,
) -> Result<Vec<usize>> {
    let n = labels.len();
    if train_count > n {
        return Err(Error::Capacity(format!(
            "train_count {train_count} exceeds {n} examples"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut train: Vec<usize> = if balanced {
        if train_count % 2 != 0 {
            return Err(Error::Config(format!(
                "balanced split requires an even train_count, got {train_count}"
            )));
        }
        let per_class = train_count / 2;
        let mut picked = Vec::with_capacity(train_count);
        for class in [0u8, 1u8] {
            let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            if members.len() < per_class {
                return Err(Error::Capacity(format!(
                    "class {class} has {} examples, need {per_class}",
                    members.len()
                )));
            }
            members.shuffle(&mut rng);
            picked.extend_from_slice(&members[..per_class]);
        }
        picked
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        all.truncate(train_count);
        all
    };
    train.sort_unstable();
    Ok(train)
}

/// Split a dataset into a train set of exactly `train_count` rows and a
/// test set holding every remaining row. Deterministic for a fixed seed.
pub fn balance_and_split(
    ds: &ActivationDataset,
    spec: &SplitSpec,
) -> Result<(ActivationDataset, ActivationDataset)> {
    let train_idx = select_train_indices(ds.labels(), spec.train_count, spec.seed, spec.balanced)?;
    let mut in_train = vec![false; ds.n_examples()];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let test_idx: Vec<usize> = (0..ds.n_examples()).filter(|&i| !in_train[i]).collect();
    Ok((ds.subset(&train_idx), ds.subset(&test_idx)))
}
