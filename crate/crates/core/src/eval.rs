//! Probe evaluation: in-domain and out-of-distribution accuracy grids and
//! bootstrap summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probes::Probe;
use crate::store::ActivationDataset;

/// A probe with the bookkeeping the grid needs: a stable id, the group it
/// is summarized under (e.g. one group per bootstrap family), and the
/// dataset it was trained on.
#[derive(Debug, Clone)]
pub struct NamedProbe {
    pub id: String,
    pub group: String,
    pub train_dataset: String,
    pub probe: Probe,
}

/// One probe x dataset accuracy measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub probe_id: String,
    pub train_dataset: String,
    pub eval_dataset: String,
    pub accuracy: f64,
    pub n: usize,
    pub in_domain: bool,
}

/// Median and quartiles of a probe group's accuracies on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub probe_group: String,
    pub eval_dataset: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Accuracy grid plus per-group bootstrap summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub summaries: Vec<SummaryRow>,
}

/// Quartile summary of a list of accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Fraction of examples the probe classifies correctly.
pub fn evaluate_probe(probe: &Probe, data: &ActivationDataset) -> Result<f64> {
    let n = data.n_examples();
    if n == 0 {
        return Err(Error::Config("cannot evaluate on an empty dataset".to_string()));
    }
    let mut correct = 0usize;
    for i in 0..n {
        if probe.classify(data.row(i))? == (data.labels()[i] == 1) {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

/// Evaluate every probe on every dataset. Rows are ordered by
/// (probe_id, dataset name); a row is in-domain when the dataset name
/// equals the probe's recorded training dataset. Summaries aggregate each
/// probe group's accuracies per dataset.
pub fn evaluate_grid(
    probes: &[NamedProbe],
    datasets: &[(String, ActivationDataset)],
) -> Result<EvalReport> {
    if datasets.is_empty() {
        return Err(Error::Config("no evaluation datasets given".to_string()));
    }
    if probes.is_empty() {
        return Err(Error::Config("no probes given".to_string()));
    }

    let mut rows = Vec::with_capacity(probes.len() * datasets.len());
    for named in probes {
        for (name, data) in datasets {
            let accuracy = evaluate_probe(&named.probe, data)?;
            rows.push(EvalRow {
                probe_id: named.id.clone(),
                train_dataset: named.train_dataset.clone(),
                eval_dataset: name.clone(),
                accuracy,
                n: data.n_examples(),
                in_domain: *name == named.train_dataset,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.probe_id
            .cmp(&b.probe_id)
            .then_with(|| a.eval_dataset.cmp(&b.eval_dataset))
    });

    let mut groups: Vec<(String, String, Vec<f64>)> = Vec::new();
    for named in probes {
        for (name, _) in datasets {
            let accuracy = rows
                .iter()
                .find(|r| r.probe_id == named.id && r.eval_dataset == *name)
                .expect("row exists for every probe x dataset")
                .accuracy;
            match groups
                .iter_mut()
                .find(|(g, d, _)| g == &named.group && d == name)
            {
                Some((_, _, accs)) => accs.push(accuracy),
                None => groups.push((named.group.clone(), name.clone(), vec![accuracy])),
            }
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let summaries = groups
        .into_iter()
        .map(|(probe_group, eval_dataset, accs)| {
            let q = summarize_bootstrap(&accs)?;
            Ok(SummaryRow {
                probe_group,
                eval_dataset,
                median: q.median,
                q1: q.q1,
                q3: q.q3,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EvalReport { rows, summaries })
}

/// Median and quartiles by linear interpolation (inclusive method).
pub fn summarize_bootstrap(accuracies: &[f64]) -> Result<Quartiles> {
    if accuracies.is_empty() {
        return Err(Error::Config("cannot summarize an empty list".to_string()));
    }
    let mut sorted = accuracies.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("accuracies are finite"));
    let quantile = |p: f64| -> f64 {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    Ok(Quartiles {
        median: quantile(0.5),
        q1: quantile(0.25),
        q3: quantile(0.75),
    })
}

/// First `n` feature ids of a ranking. The conventional figure panels use
/// the top 10 features.
pub const DEFAULT_TOP_FEATURES: usize = 10;

pub fn select_top_features(ranking: &[(usize, f64)], n: usize) -> Result<Vec<usize>> {
    if n > ranking.len() {
        return Err(Error::Config(format!(
            "asked for top {n} of a ranking with {} entries",
            ranking.len()
        )));
    }
    Ok(ranking[..n].iter().map(|&(idx, _)| idx).collect())
}
