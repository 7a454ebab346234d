//! Clustering scores against prepared-state labels, and stratified k-fold
//! cross-validation producing the `mean ± half-width` rows used in the reports.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{fit, FitConfig};
use crate::dataset::DataSet;
use crate::seed;
use crate::{Error, Result};

/// Largest number of distinct truth labels the matching DP accepts.
pub const MAX_MATCHED_LABELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AssignmentFidelity,
    FowlkesMallows,
}

impl Metric {
    pub fn score(self, predicted: &[usize], truth: &[usize]) -> Result<f64> {
        match self {
            Metric::AssignmentFidelity => assignment_fidelity(predicted, truth),
            Metric::FowlkesMallows => fowlkes_mallows(predicted, truth),
        }
    }
}

/// Contingency counts `table[p][t]` over densely re-indexed labels.
fn contingency(predicted: &[usize], truth: &[usize]) -> Vec<Vec<usize>> {
    let dense = |labels: &[usize]| -> (Vec<usize>, usize) {
        let mut ids = BTreeMap::new();
        let idx = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        (idx, ids.len())
    };
    let (p, np) = dense(predicted);
    let (t, nt) = dense(truth);
    let mut table = vec![vec![0usize; nt]; np];
    for (a, b) in p.into_iter().zip(t) {
        table[a][b] += 1;
    }
    table
}

fn check_lengths(predicted: &[usize], truth: &[usize]) -> Result<()> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Empty("labels"));
    }
    Ok(())
}

/// Fraction of points assigned to their true class under the best one-to-one
/// matching of predicted clusters to classes. Unmatched clusters count as wrong.
pub fn assignment_fidelity(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    let table = contingency(predicted, truth);
    let classes = table[0].len();
    if classes > MAX_MATCHED_LABELS {
        return Err(Error::TooManyLabels(classes));
    }
    // best[mask]: max matched count using the clusters seen so far and the classes in mask
    let mut best = vec![i64::MIN; 1 << classes];
    best[0] = 0;
    for row in &table {
        let mut next = best.clone();
        for mask in 0..best.len() {
            if best[mask] == i64::MIN {
                continue;
            }
            for (class, &count) in row.iter().enumerate() {
                if mask >> class & 1 == 0 {
                    let m = mask | 1 << class;
                    next[m] = next[m].max(best[mask] + count as i64);
                }
            }
        }
        best = next;
    }
    let matched = best.into_iter().max().unwrap_or(0);
    Ok(matched as f64 / predicted.len() as f64)
}

fn pairs(n: usize) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// `TP / √((TP + FP)(TP + FN))` over point pairs; 0 when a denominator vanishes.
pub fn fowlkes_mallows(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted, truth)?;
    if predicted.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            available: predicted.len(),
        });
    }
    let table = contingency(predicted, truth);
    let tp: f64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let pred_pairs: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let truth_pairs: f64 = (0..table[0].len())
        .map(|t| pairs(table.iter().map(|r| r[t]).sum()))
        .sum();
    if pred_pairs == 0.0 || truth_pairs == 0.0 {
        return Ok(0.0);
    }
    Ok(tp / (pred_pairs * truth_pairs).sqrt())
}

/// What the `±` value of a [`ScoreReport`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfWidth {
    /// Sample standard deviation across folds.
    #[default]
    StdDev,
    /// `1.96 · std / √n_splits`.
    Ci95,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub metric: Metric,
    pub per_fold: Vec<f64>,
    pub mean: f64,
    pub half_width: f64,
    pub half_width_kind: HalfWidth,
}

impl ScoreReport {
    pub fn from_folds(metric: Metric, per_fold: Vec<f64>, kind: HalfWidth) -> Self {
        let n = per_fold.len() as f64;
        let mean = per_fold.iter().sum::<f64>() / n;
        let std = if per_fold.len() > 1 {
            (per_fold.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let half_width = match kind {
            HalfWidth::StdDev => std,
            HalfWidth::Ci95 => 1.96 * std / n.sqrt(),
        };
        Self {
            metric,
            per_fold,
            mean,
            half_width,
            half_width_kind: kind,
        }
    }

    pub fn with_half_width(&self, kind: HalfWidth) -> Self {
        Self::from_folds(self.metric, self.per_fold.clone(), kind)
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ±{:.4}", self.mean, self.half_width)
    }
}

/// Stratified, shuffled fold assignment: each class is shuffled and dealt
/// round-robin, continuing the deal across classes so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], n_splits: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n_splits < 2 {
        return Err(Error::InvalidConfig("n_splits must be >= 2".into()));
    }
    if labels.len() < n_splits {
        return Err(Error::TooFewSamples {
            needed: n_splits,
            available: labels.len(),
        });
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some(small) = by_class.values().find(|m| m.len() < n_splits) {
        return Err(Error::TooFewSamples {
            needed: n_splits,
            available: small.len(),
        });
    }
    let mut rng = seed::rng(seed);
    let mut folds = vec![Vec::new(); n_splits];
    let mut dealt = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[dealt % n_splits].push(i);
            dealt += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Fits on each training split, predicts the held-out fold and scores it.
pub fn cross_validate(
    data: &DataSet,
    config: &FitConfig,
    n_splits: usize,
    metric: Metric,
    seed: u64,
) -> Result<ScoreReport> {
    let truth = data.labels().ok_or(Error::Empty("ground-truth labels"))?;
    let folds = stratified_folds(truth, n_splits, seed)?;
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(f, test_idx)| {
            let mut in_test = vec![false; data.len()];
            test_idx.iter().for_each(|&i| in_test[i] = true);
            let train_idx: Vec<usize> = (0..data.len()).filter(|&i| !in_test[i]).collect();
            let (train, test) = (data.subset(&train_idx), data.subset(test_idx));
            let fold_config = config.clone().with_seed(seed::derive(config.seed, f as u64));
            let model = fit(&train, &fold_config)?;
            let mut batch = fold_config.batch;
            batch.seed = seed::derive(batch.seed, u64::MAX - 1);
            let predicted = model.predict(&test, config.distance_mode, &batch)?;
            metric.score(&predicted, test.labels().expect("subset keeps labels"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreReport::from_folds(metric, per_fold, HalfWidth::StdDev))
}
