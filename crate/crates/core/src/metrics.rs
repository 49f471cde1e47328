//! Accuracy and popularity-concentration metrics.
//!
//! The degree of Matthew effect is the absolute least-squares slope of
//! `ln(count)` against `ln(rank)` over the nonzero top-K exposure counts,
//! sorted descending. Uniform exposure gives 0; exposure following
//! `c_r = C / r^s` gives exactly `s`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dataset::InteractionDataset;
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::predict::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub user: UserId,
    pub item: ItemId,
    pub predicted: f64,
    pub actual: f64,
}

pub type PredictionSet = Vec<Prediction>;

/// Predicts every triple of `dataset`.
pub fn predict_all<P: Predictor + ?Sized>(predictor: &P, dataset: &InteractionDataset) -> Result<PredictionSet> {
    dataset
        .triples()
        .iter()
        .map(|t| {
            Ok(Prediction {
                user: t.user,
                item: t.item,
                predicted: predictor.predict(t.user, t.item)?,
                actual: t.rating,
            })
        })
        .collect()
}

pub fn mae(preds: &[Prediction]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::config("MAE of an empty prediction set"));
    }
    let total: f64 = preds.iter().map(|p| (p.predicted - p.actual).abs()).sum();
    Ok(total / preds.len() as f64)
}

/// Ids of the `k` best scores, by score descending then id ascending.
pub fn top_k_from_scores(scored: &mut [(ItemId, f64)], k: usize) -> Vec<ItemId> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.iter().take(k).map(|&(id, _)| id).collect()
}

/// Per-user top-`k` lists over `item_ids`, skipping `exclude` pairs.
/// Users with fewer than `k` candidates get every candidate.
pub fn top_k<P: Predictor + ?Sized>(
    predictor: &P,
    user_ids: &[UserId],
    item_ids: &[ItemId],
    k: usize,
    exclude: &HashSet<(UserId, ItemId)>,
) -> Result<Vec<(UserId, Vec<ItemId>)>> {
    if k == 0 {
        return Err(Error::config("top-k needs k >= 1"));
    }
    let mut out = Vec::with_capacity(user_ids.len());
    let mut scored = Vec::with_capacity(item_ids.len());
    for &user in user_ids {
        scored.clear();
        for &item in item_ids {
            if !exclude.contains(&(user, item)) {
                scored.push((item, predictor.predict(user, item)?));
            }
        }
        out.push((user, top_k_from_scores(&mut scored, k)));
    }
    Ok(out)
}

/// How often each item appears across users' top-K lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureProfile {
    pub k: usize,
    pub counts: BTreeMap<ItemId, u64>,
    pub users_served: usize,
}

impl ExposureProfile {
    /// Items of `universe` that never appear get an explicit zero count.
    pub fn from_lists(k: usize, lists: &[(UserId, Vec<ItemId>)], universe: &[ItemId]) -> Self {
        let mut counts: BTreeMap<ItemId, u64> = universe.iter().map(|&i| (i, 0)).collect();
        for (_, list) in lists {
            for &item in list {
                *counts.entry(item).or_insert(0) += 1;
            }
        }
        ExposureProfile {
            k,
            counts,
            users_served: lists.len(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatthewEffect {
    pub degree: f64,
    /// Items with nonzero exposure that entered the fit.
    pub fitted: usize,
    /// Items with zero exposure, left out because `ln 0` is undefined.
    pub zero_excluded: usize,
}

/// Absolute log-log slope over positive counts in any order.
pub fn matthew_degree_from_counts(counts: &[f64]) -> Result<MatthewEffect> {
    let mut positive: Vec<f64> = counts.iter().copied().filter(|&c| c > 0.0).collect();
    let zero_excluded = counts.len() - positive.len();
    if positive.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least two items with nonzero exposure, found {}",
            positive.len()
        )));
    }
    positive.sort_by(|a, b| b.total_cmp(a));
    let n = positive.len() as f64;
    let xs: Vec<f64> = (1..=positive.len()).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = positive.iter().map(|c| c.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(MatthewEffect {
        degree: (sxy / sxx).abs(),
        fitted: positive.len(),
        zero_excluded,
    })
}

pub fn matthew_degree(exposure: &ExposureProfile) -> Result<MatthewEffect> {
    let counts: Vec<f64> = exposure.counts.values().map(|&c| c as f64).collect();
    matthew_degree_from_counts(&counts)
}
