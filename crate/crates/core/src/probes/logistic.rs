//! L2-regularized logistic regression and the cross-validated
//! regularization sweep behind dense residual-stream probes.
//!
//! Objective: mean log-loss plus `lambda * ||w||^2 / 2`, intercept
//! unpenalized. Solved by full-batch gradient descent with a step size of
//! one over a Lipschitz bound of the gradient; at most 1000 iterations,
//! stopping once the gradient infinity-norm drops below 1e-6. All
//! accumulation is in f64, so fits are deterministic.

use rayon::prelude::*;

use super::{
    fold_complements, sigmoid, stratified_folds, Probe, ProbeKind, SweepConfig, DEFAULT_THRESHOLD,
    FOLD_SEED,
};
use crate::error::{Error, Result};
use crate::matrix::MatrixF32;

const MAX_ITERATIONS: usize = 1000;
const GRADIENT_TOLERANCE: f64 = 1e-6;

/// Result of a residual-probe fit: the refit probe, the regularization
/// strength that won the sweep, and the full cross-validation curve as
/// (lambda, mean CV accuracy) pairs in grid order.
#[derive(Debug, Clone)]
pub struct ResidualProbeFit {
    pub probe: Probe,
    pub chosen_lambda: f64,
    pub cv_curve: Vec<(f64, f64)>,
}

/// The geometric grid of regularization strengths: exactly `n_steps`
/// values, first `lam_min`, last `lam_max`, constant ratio.
pub fn lambda_grid(cfg: &SweepConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let steps = cfg.n_steps;
    let ratio = (cfg.lam_max / cfg.lam_min).powf(1.0 / (steps - 1) as f64);
    let mut grid = Vec::with_capacity(steps);
    grid.push(cfg.lam_min);
    for i in 1..steps - 1 {
        grid.push(cfg.lam_min * ratio.powi(i as i32));
    }
    grid.push(cfg.lam_max);
    Ok(grid)
}

pub(crate) struct LogisticFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

/// Full-batch gradient descent on the regularized logistic objective.
/// `rows` are the training examples (already gathered), `labels` their
/// 0/1 targets.
pub(crate) fn fit_logistic(rows: &[&[f64]], labels: &[u8], lambda: f64) -> LogisticFit {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let nf = n as f64;

    // Lipschitz bound on the gradient: lambda from the ridge term plus the
    // trace bound (1/4n) sum ||(x, 1)||^2 from the log-loss Hessian.
    let mean_sq: f64 = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0)
        .sum::<f64>()
        / nf;
    let step = 1.0 / (lambda + 0.25 * mean_sq);

    let mut weights = vec![0.0f64; d];
    let mut intercept = 0.0f64;
    let mut grad_w = vec![0.0f64; d];

    for _ in 0..MAX_ITERATIONS {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0f64;
        for (row, &y) in rows.iter().zip(labels) {
            let z = row
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| x * w)
                .sum::<f64>()
                + intercept;
            let r = sigmoid(z) - f64::from(y);
            for (g, &x) in grad_w.iter_mut().zip(*row) {
                *g += r * x;
            }
            grad_b += r;
        }
        let mut max_abs = (grad_b / nf).abs();
        for (g, &w) in grad_w.iter_mut().zip(&weights) {
            *g = *g / nf + lambda * w;
            max_abs = max_abs.max(g.abs());
        }
        if max_abs < GRADIENT_TOLERANCE {
            break;
        }
        for (w, &g) in weights.iter_mut().zip(&grad_w) {
            *w -= step * g;
        }
        intercept -= step * (grad_b / nf);
    }

    LogisticFit { weights, intercept }
}

fn logistic_accuracy(fit: &LogisticFit, rows: &[&[f64]], labels: &[u8]) -> f64 {
    let correct = rows
        .iter()
        .zip(labels)
        .filter(|(row, &y)| {
            let z = row
                .iter()
                .zip(&fit.weights)
                .map(|(&x, &w)| x * w)
                .sum::<f64>()
                + fit.intercept;
            (sigmoid(z) >= DEFAULT_THRESHOLD) == (y == 1)
        })
        .count();
    correct as f64 / rows.len() as f64
}

/// Mean cross-validated logistic accuracy over the given folds for one
/// regularization strength.
pub(crate) fn cv_logistic_accuracy(
    rows: &[Vec<f64>],
    labels: &[u8],
    folds: &[Vec<usize>],
    complements: &[Vec<usize>],
    lambda: f64,
) -> f64 {
    let mut acc_sum = 0.0;
    let mut scored = 0usize;
    for (fold, train) in folds.iter().zip(complements) {
        if fold.is_empty() || train.is_empty() {
            continue;
        }
        let train_rows: Vec<&[f64]> = train.iter().map(|&i| rows[i].as_slice()).collect();
        let train_labels: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
        let fit = fit_logistic(&train_rows, &train_labels, lambda);
        let eval_rows: Vec<&[f64]> = fold.iter().map(|&i| rows[i].as_slice()).collect();
        let eval_labels: Vec<u8> = fold.iter().map(|&i| labels[i]).collect();
        acc_sum += logistic_accuracy(&fit, &eval_rows, &eval_labels);
        scored += 1;
    }
    acc_sum / scored as f64
}

pub(crate) fn rows_f64(features: &MatrixF32) -> Vec<Vec<f64>> {
    (0..features.rows())
        .map(|i| features.row(i).iter().map(|&v| f64::from(v)).collect())
        .collect()
}

/// Fit a dense logistic probe with the regularization strength chosen by
/// cross-validated accuracy over the geometric grid. Ties on the grid go
/// to the smaller strength; the final probe is refit on all data.
pub fn fit_residual_probe(
    features: &MatrixF32,
    labels: &[u8],
    cfg: &SweepConfig,
) -> Result<ResidualProbeFit> {
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
    let ones = labels.iter().filter(|&&y| y == 1).count();
    if ones == 0 || ones == n {
        return Err(Error::DegenerateLabels(
            "residual probe requires both label classes".to_string(),
        ));
    }

    let grid = lambda_grid(cfg)?;
    let rows = rows_f64(features);
    let folds = stratified_folds(labels, cfg.folds, FOLD_SEED);
    let complements = fold_complements(&folds, n);

    let cv_curve: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&lambda| {
            (
                lambda,
                cv_logistic_accuracy(&rows, labels, &folds, &complements, lambda),
            )
        })
        .collect();

    let mut chosen_lambda = cv_curve[0].0;
    let mut best_acc = cv_curve[0].1;
    for &(lambda, acc) in &cv_curve[1..] {
        if acc > best_acc {
            best_acc = acc;
            chosen_lambda = lambda;
        }
    }

    let all_rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let fit = fit_logistic(&all_rows, labels, chosen_lambda);
    let probe = Probe {
        kind: ProbeKind::LogisticDense,
        feature_indices: Vec::new(),
        coefficients: fit.weights,
        intercept: fit.intercept,
        threshold: DEFAULT_THRESHOLD,
        chosen_lambda: Some(chosen_lambda),
        degenerate: false,
        train_dataset: None,
    };
    Ok(ResidualProbeFit {
        probe,
        chosen_lambda,
        cv_curve,
    })
}
