//! Sparse-autoencoder feature probing at desk scale.
//!
//! This crate implements the full probing workflow around a sparse
//! autoencoder (SAE) trained on language-model activations:
//!
//! - [`store`]: bit-exact binary storage for labeled activation datasets,
//!   plus deterministic balanced train/test splitting.
//! - [`sae`]: SAE forward pass (pre/post activation), L1-regularized loss,
//!   a toy trainer for producing desk-scale fixtures, and weight files.
//! - [`probes`]: 1-sparse OLS probes on single SAE features,
//!   cross-validated feature ranking, dense logistic residual-stream
//!   probes with a swept regularization strength, k-sparse beam search,
//!   and bootstrap replicates.
//! - [`eval`]: in-domain and out-of-distribution accuracy grids with
//!   bootstrap median/quartile summaries.
//! - [`similarity`]: cosine similarities between SAE encoder features,
//!   feature groups, and probe coefficient vectors.
//! - [`datagen`]: contrastive prompt corpora (equations, celebrity names,
//!   prompt-template variations) and planted-truth activation worlds that
//!   serve as ground-truth oracles.
//! - [`report`]: CSV/JSON report files and standalone SVG charts.
//!
//! Everything is deterministic given the configured seeds; see
//! [`rng::derive_seed`] for how pipelines split one global seed into
//! per-stage seeds.

pub mod datagen;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod probes;
pub mod report;
pub mod rng;
pub mod sae;
pub mod similarity;
pub mod store;

pub use error::{Error, Result};
pub use eval::{EvalReport, NamedProbe};
pub use matrix::MatrixF32;
pub use probes::{Probe, ProbeKind, SearchConfig, SweepConfig};
pub use sae::{EncodeStage, SaeActivation, SaeModel, SaeTrainConfig};
pub use similarity::SimilarityMatrix;
pub use store::{ActivationDataset, DatasetMeta, SplitSpec};
