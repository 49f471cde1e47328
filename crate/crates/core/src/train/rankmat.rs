//! RankMat baseline: `((1 / (rank_u * rank_i))^x - r / r_max)^2`.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::ingest::{PopularityRanks, SplitDataset};
use crate::model::{check_eps, clamp_unit, init_model, FactorModel, TrainConfig, DEFAULT_CLAMP_EPS};
use crate::predict::Predictor;
use crate::seed::derive_seed;

use super::{snapshot_update, TrainTrace};

#[inline]
fn base(user_rank: u32, item_rank: u32) -> f64 {
    1.0 / (user_rank as f64 * item_rank as f64)
}

/// Gradient coefficient of `(a^x - target)^2` w.r.t. `U` (times `V`):
/// `2 (a^x - target) a^x ln a`.
#[inline]
pub fn rankmat_coefficient(a: f64, x: f64, target: f64) -> f64 {
    let p = a.powf(x);
    2.0 * (p - target) * p * a.ln()
}

#[inline]
pub fn rankmat_loss(a: f64, x: f64, target: f64) -> f64 {
    let r = a.powf(x) - target;
    r * r
}

pub fn fit_rankmat(
    model: &mut FactorModel,
    split: &SplitDataset,
    ranks: &PopularityRanks,
    config: &TrainConfig,
) -> Result<TrainTrace> {
    config.validate()?;
    let train = &split.train;
    if train.is_empty() {
        return Err(Error::config("RankMat needs a non-empty train split"));
    }
    let rows = train
        .triples()
        .iter()
        .map(|t| {
            let a = base(ranks.user_rank(t.user)?, ranks.item_rank(t.item)?);
            Ok((
                model.user_idx(t.user)?,
                model.item_idx(t.item)?,
                a,
                t.rating / train.r_max(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut trace = TrainTrace::default();
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, 0x4a, epoch as u64]));
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &n in &order {
            let (ui, ii, a, target) = rows[n];
            let x = clamp_unit(model.raw_dot(ui, ii), config.clamp_eps);
            loss_sum += rankmat_loss(a, x, target);
            let c = rankmat_coefficient(a, x, target);
            if c != 0.0 {
                let (u, v) = model.rows_mut(ui, ii);
                snapshot_update(u, v, config.learning_rate * c, true);
            }
        }
        trace.record(epoch, loss_sum, rows.len(), started);
    }
    Ok(trace)
}

pub fn train_rankmat(
    split: &SplitDataset,
    ranks: &PopularityRanks,
    config: &TrainConfig,
) -> Result<(FactorModel, TrainTrace)> {
    config.validate()?;
    let mut model = init_model(split.users(), split.items(), config.dim, config.seed)?;
    let trace = fit_rankmat(&mut model, split, ranks, config)?;
    Ok((model, trace))
}

/// Reconstructs `r_max * (1 / (rank_u * rank_i))^x`, the quantity RankMat
/// fits to `r / r_max`.
#[derive(Debug, Clone)]
pub struct RankMatPredictor {
    pub model: FactorModel,
    pub ranks: PopularityRanks,
    pub r_max: f64,
    pub eps: f64,
}

impl RankMatPredictor {
    pub fn new(model: FactorModel, ranks: PopularityRanks, r_max: f64) -> Self {
        RankMatPredictor {
            model,
            ranks,
            r_max,
            eps: DEFAULT_CLAMP_EPS,
        }
    }
}

impl Predictor for RankMatPredictor {
    fn predict(&self, user: UserId, item: ItemId) -> Result<f64> {
        check_eps(self.eps)?;
        let a = base(self.ranks.user_rank(user)?, self.ranks.item_rank(item)?);
        let x = clamp_unit(
            self.model
                .raw_dot(self.model.user_idx(user)?, self.model.item_idx(item)?),
            self.eps,
        );
        Ok(self.r_max * a.powf(x))
    }
}
