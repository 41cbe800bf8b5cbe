//! Beam search over feature subsets.
//!
//! Level 1 is the cross-validated single-feature ranking truncated to the
//! candidate pool. Level k extends each of the best `beam` (k-1)-sets with
//! every pool feature not already in the set, deduplicates the resulting
//! index sets, and scores each by cross-validated logistic accuracy at a
//! fixed regularization strength. With a beam covering all (k-1)-sets and
//! the pool covering all features, the search is exhaustive.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::logistic::{cv_logistic_accuracy, rows_f64};
use super::{
    fold_complements, rank_features_cv, stratified_folds, SearchConfig, SweepConfig,
};
use crate::error::{Error, Result};
use crate::matrix::MatrixF32;

/// Ranked feature sets with their cross-validated accuracies, best first.
pub type RankedSets = Vec<(Vec<usize>, f64)>;

/// Search feature subsets of size 1..=k_max. Returns one ranked list per
/// size, in size order.
pub fn search_k_sparse(
    features: &MatrixF32,
    labels: &[u8],
    cfg: &SearchConfig,
) -> Result<Vec<RankedSets>> {
    if cfg.pool == 0 || cfg.beam == 0 || cfg.k_max == 0 {
        return Err(Error::Config(
            "pool, beam, and k_max must be positive".to_string(),
        ));
    }
    if cfg.pool > features.cols() {
        return Err(Error::Config(format!(
            "pool {} exceeds {} features",
            cfg.pool,
            features.cols()
        )));
    }
    if !(cfg.reg > 0.0) {
        return Err(Error::Config("reg must be positive".to_string()));
    }

    let sweep = SweepConfig::default();
    let mut level1 = rank_features_cv(features, labels, &sweep)?;
    level1.truncate(cfg.pool);
    let pool_features: Vec<usize> = level1.iter().map(|&(idx, _)| idx).collect();

    let folds = stratified_folds(labels, sweep.folds, cfg.seed);
    let complements = fold_complements(&folds, features.rows());
    let all_rows = rows_f64(features);

    let mut levels: Vec<RankedSets> = Vec::with_capacity(cfg.k_max);
    levels.push(
        level1
            .into_iter()
            .map(|(idx, acc)| (vec![idx], acc))
            .collect(),
    );

    for _k in 2..=cfg.k_max {
        let parents = &levels[levels.len() - 1];
        let retained = parents.len().min(cfg.beam);
        let mut candidates: BTreeSet<Vec<usize>> = BTreeSet::new();
        for (parent, _) in &parents[..retained] {
            for &f in &pool_features {
                if !parent.contains(&f) {
                    let mut set = parent.clone();
                    set.push(f);
                    set.sort_unstable();
                    candidates.insert(set);
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let mut scored: RankedSets = candidates
            .into_iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|set| {
                let rows: Vec<Vec<f64>> = all_rows
                    .iter()
                    .map(|row| set.iter().map(|&j| row[j]).collect())
                    .collect();
                let acc = cv_logistic_accuracy(&rows, labels, &folds, &complements, cfg.reg);
                (set, acc)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("cv accuracies are finite")
                .then_with(|| a.0.cmp(&b.0))
        });
        levels.push(scored);
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn planted_pair(n: usize, d: usize, seed: u64) -> (MatrixF32, Vec<u8>) {
        // Labels predictable only from features 1 and 3 jointly.
        let mut rng = seeded_rng(seed);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let y = (i % 2) as u8;
            let mut row: Vec<f32> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let half = if rng.random_range(0..2) == 0 { 0.75 } else { -0.75 };
            row[1] += f32::from(y) * half * 2.0;
            row[3] -= f32::from(y) * half * 2.0 - f32::from(y) * 1.5;
            rows.push(row);
            labels.push(y);
        }
        (MatrixF32::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn k_max_one_equals_ranking() {
        let (features, labels) = planted_pair(40, 6, 3);
        let cfg = SearchConfig {
            k_max: 1,
            beam: 50,
            pool: 6,
            reg: 1.0,
            seed: 0,
        };
        let levels = search_k_sparse(&features, &labels, &cfg).unwrap();
        assert_eq!(levels.len(), 1);
        let ranking = rank_features_cv(&features, &labels, &SweepConfig::default()).unwrap();
        let expect: Vec<(Vec<usize>, f64)> =
            ranking.into_iter().map(|(i, a)| (vec![i], a)).collect();
        assert_eq!(levels[0], expect);
    }

    #[test]
    fn pool_larger_than_features_is_rejected() {
        let (features, labels) = planted_pair(20, 4, 1);
        let cfg = SearchConfig {
            pool: 5,
            ..SearchConfig::default()
        };
        assert!(matches!(
            search_k_sparse(&features, &labels, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn level_sets_have_expected_sizes_and_order() {
        let (features, labels) = planted_pair(30, 5, 7);
        let cfg = SearchConfig {
            k_max: 2,
            beam: 50,
            pool: 5,
            reg: 1.0,
            seed: 0,
        };
        let levels = search_k_sparse(&features, &labels, &cfg).unwrap();
        assert_eq!(levels[0].len(), 5);
        // All C(5,2) = 10 pairs, each of size 2, sorted by accuracy.
        assert_eq!(levels[1].len(), 10);
        assert!(levels[1].iter().all(|(s, _)| s.len() == 2));
        assert!(levels[1].windows(2).all(|w| w[0].1 >= w[1].1));
    }
}
