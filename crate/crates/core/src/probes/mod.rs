//! Answerability probes over feature activations.
//!
//! Four fitting procedures:
//! - [`fit_one_sparse`]: ordinary least squares on a single feature's
//!   activation (slope + intercept).
//! - [`rank_features_cv`]: cross-validated accuracy of the 1-sparse fit for
//!   every feature column, ranked.
//! - [`fit_residual_probe`] (in [`logistic`]): L2-regularized logistic
//!   regression over the full input with a cross-validated sweep of the
//!   regularization strength.
//! - [`search_k_sparse`] (in [`search`]): beam search over feature subsets
//!   scored by cross-validated logistic accuracy.
//!
//! All fits are deterministic functions of (data, config, seed). Ties in
//! rankings break toward the lower feature index / lexicographically
//! smaller index set so parallel and serial runs agree.

mod logistic;
mod search;

pub use logistic::{fit_residual_probe, lambda_grid, ResidualProbeFit};
pub use search::{search_k_sparse, RankedSets};

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::MatrixF32;
use crate::rng::{derive_seed, seeded_rng};
use crate::store::select_train_indices;

/// Fixed shuffle seed for cross-validation fold assignment; rankings are
/// reproducible without threading a seed through every call.
pub(crate) const FOLD_SEED: u64 = 0x5eed_f01d;

/// Default decision threshold on the probe output.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// OLS slope/intercept on a single feature activation.
    OlsOneSparse,
    /// Logistic regression over every input dimension.
    LogisticDense,
    /// Logistic regression over a selected feature subset.
    LogisticSparse,
}

/// A fitted linear classifier. `feature_indices` empty means the probe is
/// dense over all input dimensions; otherwise coefficients line up with the
/// (strictly increasing) indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub kind: ProbeKind,
    pub feature_indices: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_dataset: Option<String>,
}

impl Probe {
    /// Validate coefficient finiteness and index ordering.
    pub fn validate(&self) -> Result<()> {
        if !self.coefficients.iter().all(|c| c.is_finite())
            || !self.intercept.is_finite()
            || !self.threshold.is_finite()
        {
            return Err(Error::Validation(
                "probe parameters must be finite".to_string(),
            ));
        }
        if !self.feature_indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation(
                "feature indices must be strictly increasing".to_string(),
            ));
        }
        if !self.feature_indices.is_empty()
            && self.coefficients.len() != self.feature_indices.len()
        {
            return Err(Error::Validation(format!(
                "{} coefficients for {} feature indices",
                self.coefficients.len(),
                self.feature_indices.len()
            )));
        }
        Ok(())
    }

    /// Raw decision score for one input row: the OLS prediction for
    /// one-sparse probes, the logistic probability otherwise.
    pub fn score(&self, x: &[f32]) -> Result<f64> {
        let linear = if self.feature_indices.is_empty() {
            if x.len() != self.coefficients.len() {
                return Err(Error::Shape(format!(
                    "input has {} entries, dense probe expects {}",
                    x.len(),
                    self.coefficients.len()
                )));
            }
            self.coefficients
                .iter()
                .zip(x)
                .map(|(&c, &v)| c * f64::from(v))
                .sum::<f64>()
                + self.intercept
        } else {
            let mut acc = self.intercept;
            for (&idx, &c) in self.feature_indices.iter().zip(&self.coefficients) {
                let v = *x.get(idx).ok_or_else(|| {
                    Error::Shape(format!(
                        "probe references feature {idx}, input has {} entries",
                        x.len()
                    ))
                })?;
                acc += c * f64::from(v);
            }
            acc
        };
        Ok(match self.kind {
            ProbeKind::OlsOneSparse => linear,
            ProbeKind::LogisticDense | ProbeKind::LogisticSparse => sigmoid(linear),
        })
    }

    /// Classify one input row: answerable iff score >= threshold.
    pub fn classify(&self, x: &[f32]) -> Result<bool> {
        Ok(self.score(x)? >= self.threshold)
    }

    /// The probe with its decision flipped: coefficients negated and the
    /// intercept reflected so scores mirror around the threshold.
    pub fn flipped(&self) -> Probe {
        let mut out = self.clone();
        for c in &mut out.coefficients {
            *c = -*c;
        }
        out.intercept = match self.kind {
            // sigmoid(-z) = 1 - sigmoid(z), which mirrors around 0.5
            ProbeKind::LogisticDense | ProbeKind::LogisticSparse => -self.intercept,
            ProbeKind::OlsOneSparse => 2.0 * self.threshold - self.intercept,
        };
        out
    }
}

/// Save a probe as JSON.
pub fn save_probe(probe: &Probe, path: &Path) -> Result<()> {
    probe.validate()?;
    let json = serde_json::to_string_pretty(probe).expect("probe serialization cannot fail");
    fs::write(path, json).map_err(|e| Error::storage(path, e))
}

/// Load a probe saved by [`save_probe`].
pub fn load_probe(path: &Path) -> Result<Probe> {
    let json = fs::read_to_string(path).map_err(|e| Error::storage(path, e))?;
    let probe: Probe =
        serde_json::from_str(&json).map_err(|e| Error::Format(format!("bad probe file: {e}")))?;
    probe.validate()?;
    Ok(probe)
}

/// Cross-validation and regularization-sweep parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub folds: usize,
    pub n_steps: usize,
    pub lam_min: f64,
    pub lam_max: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            folds: 5,
            n_steps: 26,
            lam_min: 1e-4,
            lam_max: 1.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds == 0 {
            return Err(Error::Config("folds must be positive".to_string()));
        }
        if self.n_steps < 2 {
            return Err(Error::Config("n_steps must be at least 2".to_string()));
        }
        if !(self.lam_min > 0.0) || !(self.lam_min < self.lam_max) {
            return Err(Error::Config(
                "require 0 < lam_min < lam_max".to_string(),
            ));
        }
        Ok(())
    }
}

/// Beam-search parameters for k-sparse probes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Largest feature-set size to search.
    pub k_max: usize,
    /// Number of best (k-1)-sets retained as parents.
    pub beam: usize,
    /// Number of best single features eligible as extensions.
    pub pool: usize,
    /// Fixed regularization strength for all subset fits.
    pub reg: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            k_max: 5,
            beam: 50,
            pool: 500,
            reg: 1.0,
            seed: 0,
        }
    }
}

/// OLS fit of labels on a single activation vector, accumulated in f64.
/// Returns (slope, intercept, degenerate).
fn ols_fit(acts: &[f64], labels: &[u8], rows: &[usize]) -> (f64, f64, bool) {
    let n = rows.len() as f64;
    let mut sum_a = 0.0;
    let mut sum_y = 0.0;
    for &i in rows {
        sum_a += acts[i];
        sum_y += f64::from(labels[i]);
    }
    let mean_a = sum_a / n;
    let mean_y = sum_y / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for &i in rows {
        let da = acts[i] - mean_a;
        cov += da * (f64::from(labels[i]) - mean_y);
        var += da * da;
    }
    if var == 0.0 {
        return (0.0, mean_y, true);
    }
    (cov / var, mean_y - (cov / var) * mean_a, false)
}

fn ols_accuracy(acts: &[f64], labels: &[u8], rows: &[usize], slope: f64, intercept: f64) -> f64 {
    let correct = rows
        .iter()
        .filter(|&&i| {
            let answerable = slope * acts[i] + intercept >= DEFAULT_THRESHOLD;
            answerable == (labels[i] == 1)
        })
        .count();
    correct as f64 / rows.len() as f64
}

/// Fit an OLS slope and intercept predicting the labels from a single
/// feature's activations. A zero-variance feature yields a degenerate
/// probe (slope 0, intercept at the label mean).
pub fn fit_one_sparse(acts: &[f32], labels: &[u8]) -> Result<Probe> {
    if acts.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} activations for {} labels",
            acts.len(),
            labels.len()
        )));
    }
    if acts.len() < 2 {
        return Err(Error::Config(
            "one-sparse fit needs at least 2 examples".to_string(),
        ));
    }
    let acts_f64: Vec<f64> = acts.iter().map(|&a| f64::from(a)).collect();
    let rows: Vec<usize> = (0..acts.len()).collect();
    let (slope, intercept, degenerate) = ols_fit(&acts_f64, labels, &rows);
    Ok(Probe {
        kind: ProbeKind::OlsOneSparse,
        feature_indices: vec![0],
        coefficients: vec![slope],
        intercept,
        threshold: DEFAULT_THRESHOLD,
        chosen_lambda: None,
        degenerate,
        train_dataset: None,
    })
}

/// Fit a one-sparse probe on column `feature` of a feature matrix; the
/// returned probe indexes that column.
pub fn fit_one_sparse_feature(
    features: &MatrixF32,
    labels: &[u8],
    feature: usize,
) -> Result<Probe> {
    if feature >= features.cols() {
        return Err(Error::Shape(format!(
            "feature {feature} out of range for {} columns",
            features.cols()
        )));
    }
    let col: Vec<f32> = (0..features.rows())
        .map(|i| features.get(i, feature))
        .collect();
    let mut probe = fit_one_sparse(&col, labels)?;
    probe.feature_indices = vec![feature];
    Ok(probe)
}

/// Assign every example to one of `folds` cross-validation folds:
/// contiguous blocks of a seeded per-class shuffle, so folds are stratified
/// by label. Returns the example indices of each fold.
pub(crate) fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = seeded_rng(seed);
    let mut out = vec![Vec::new(); folds];
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let base = members.len() / folds;
        let extra = members.len() % folds;
        let mut start = 0;
        for (f, fold) in out.iter_mut().enumerate() {
            let size = base + usize::from(f < extra);
            fold.extend_from_slice(&members[start..start + size]);
            start += size;
        }
    }
    out
}

/// Complement index lists: for each fold, every example not in it.
pub(crate) fn fold_complements(folds: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    folds
        .iter()
        .map(|fold| {
            let mut in_fold = vec![false; n];
            for &i in fold {
                in_fold[i] = true;
            }
            (0..n).filter(|&i| !in_fold[i]).collect()
        })
        .collect()
}

/// Sort a ranking by accuracy descending, ties toward the lower index.
fn sort_ranking(ranking: &mut [(usize, f64)]) {
    ranking.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("cv accuracies are finite")
            .then(a.0.cmp(&b.0))
    });
}

/// Cross-validated one-sparse accuracy for every feature column, ranked
/// descending. Deterministic; per-feature scoring runs in parallel.
pub fn rank_features_cv(
    features: &MatrixF32,
    labels: &[u8],
    cfg: &SweepConfig,
) -> Result<Vec<(usize, f64)>> {
    cfg.validate()?;
    let n = features.rows();
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            n
        )));
    }
    if n < cfg.folds {
        return Err(Error::Config(format!(
            "{n} examples cannot fill {} folds",
            cfg.folds
        )));
    }
    let folds = stratified_folds(labels, cfg.folds, FOLD_SEED);
    let complements = fold_complements(&folds, n);

    let mut ranking: Vec<(usize, f64)> = (0..features.cols())
        .into_par_iter()
        .map(|j| {
            let col = features.column_f64(j);
            let mut acc_sum = 0.0;
            let mut scored = 0usize;
            for (fold, train) in folds.iter().zip(&complements) {
                if fold.is_empty() || train.is_empty() {
                    continue;
                }
                let (slope, intercept, _) = ols_fit(&col, labels, train);
                acc_sum += ols_accuracy(&col, labels, fold, slope, intercept);
                scored += 1;
            }
            (j, acc_sum / scored as f64)
        })
        .collect();
    sort_ranking(&mut ranking);
    Ok(ranking)
}

/// Fit `n_replicates` dense residual probes, each on an independently
/// seeded balanced subsample of `train_count` examples.
pub fn bootstrap_probes(
    features: &MatrixF32,
    labels: &[u8],
    n_replicates: usize,
    train_count: usize,
    seed: u64,
    cfg: &SweepConfig,
) -> Result<Vec<Probe>> {
    if n_replicates == 0 {
        return Err(Error::Config("n_replicates must be positive".to_string()));
    }
    let mut probes = Vec::with_capacity(n_replicates);
    for r in 0..n_replicates {
        let sub_seed = derive_seed(seed, &format!("bootstrap-replicate-{r}"));
        let train_idx = select_train_indices(labels, train_count, sub_seed, true)?;
        let sub_features = features.gather_rows(&train_idx);
        let sub_labels: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
        let fit = fit_residual_probe(&sub_features, &sub_labels, cfg)?;
        probes.push(fit.probe);
    }
    Ok(probes)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
