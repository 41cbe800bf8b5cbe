//! Cosine-similarity analyses between SAE encoder features and probe
//! coefficient vectors.
//!
//! A feature's direction is its encoder weight row; a probe's direction is
//! its coefficient vector with the intercept excluded. Group directions
//! for k-sparse feature sets are the coefficient-weighted sums of the
//! member encoder rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probes::Probe;
use crate::sae::SaeModel;

/// Labeled similarity grid with values in [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// A feature subset with the coefficients a sparse probe assigned to it.
#[derive(Debug, Clone)]
pub struct FeatureGroup {
    pub indices: Vec<usize>,
    pub coefficients: Vec<f64>,
}

/// Cosine similarity of two vectors, accumulated in f64.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateVector(
            "cosine of a zero vector".to_string(),
        ));
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// Pairwise cosine similarities between two labeled vector families.
pub fn pairwise_similarity(
    rows: &[(String, Vec<f64>)],
    cols: &[(String, Vec<f64>)],
) -> Result<SimilarityMatrix> {
    let values = rows
        .iter()
        .map(|(_, u)| cols.iter().map(|(_, v)| cosine(u, v)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SimilarityMatrix {
        row_labels: rows.iter().map(|(l, _)| l.clone()).collect(),
        col_labels: cols.iter().map(|(l, _)| l.clone()).collect(),
        values,
    })
}

/// The probe's direction: its coefficient vector, intercept excluded.
pub fn probe_direction(probe: &Probe) -> Vec<f64> {
    probe.coefficients.clone()
}

/// Encoder row widened to f64.
pub fn feature_direction(sae: &SaeModel, feature: usize) -> Vec<f64> {
    sae.encoder_row(feature)
        .iter()
        .map(|&v| f64::from(v))
        .collect()
}

/// Direction of a feature group: the coefficient-weighted sum of member
/// encoder rows.
pub fn group_direction(sae: &SaeModel, group: &FeatureGroup) -> Result<Vec<f64>> {
    if group.indices.is_empty() {
        return Err(Error::Config("empty feature group".to_string()));
    }
    if group.indices.len() != group.coefficients.len() {
        return Err(Error::Shape(format!(
            "{} indices with {} coefficients",
            group.indices.len(),
            group.coefficients.len()
        )));
    }
    let mut direction = vec![0.0f64; sae.d_model()];
    for (&idx, &coef) in group.indices.iter().zip(&group.coefficients) {
        if idx >= sae.d_sae() {
            return Err(Error::Shape(format!(
                "feature {idx} out of range for d_sae {}",
                sae.d_sae()
            )));
        }
        for (d, &w) in direction.iter_mut().zip(sae.encoder_row(idx)) {
            *d += coef * f64::from(w);
        }
    }
    Ok(direction)
}

/// For each group size, the mean absolute cosine between every group
/// direction of that size and every probe direction.
pub fn group_similarity(
    sae: &SaeModel,
    groups_by_size: &BTreeMap<usize, Vec<FeatureGroup>>,
    probes: &[Probe],
) -> Result<Vec<(usize, f64)>> {
    if groups_by_size.is_empty() || groups_by_size.values().any(Vec::is_empty) {
        return Err(Error::Config("every group size needs groups".to_string()));
    }
    if probes.is_empty() {
        return Err(Error::Config("no probes given".to_string()));
    }
    let probe_dirs: Vec<Vec<f64>> = probes.iter().map(probe_direction).collect();
    let mut out = Vec::with_capacity(groups_by_size.len());
    for (&size, groups) in groups_by_size {
        let mut sum = 0.0;
        let mut count = 0usize;
        for group in groups {
            let dir = group_direction(sae, group)?;
            for probe_dir in &probe_dirs {
                sum += cosine(&dir, probe_dir)?.abs();
                count += 1;
            }
        }
        out.push((size, sum / count as f64));
    }
    Ok(out)
}
