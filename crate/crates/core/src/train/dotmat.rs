//! DotMat: SGD on `|x^x - r / r_max|` with `x` the clamped dot product.
//!
//! The derivative of `x^x` is `x^x (1 + ln x)`, so one step moves
//!
//! ```text
//! U <- U - lr * x^x * sign(x^x - target) * (1 + ln x) * V
//! V <- V - lr * x^x * sign(x^x - target) * (1 + ln x) * U
//! ```
//!
//! from a snapshot of both vectors, then floors every entry at zero. The
//! data-free form replaces the target `r / r_max` with `x` itself. Since
//! `x^x > x` on `(0, 1)` its sign factor is always `+1`, and the step
//! vanishes only where `1 + ln x = 0`, i.e. at `x = 1/e`.

use std::time::Instant;

use crate::dataset::InteractionDataset;
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::model::{check_eps, clamp_unit, init_model, FactorModel, TrainConfig, DEFAULT_CLAMP_EPS};

use super::{check_lr, sign, snapshot_update, PairSampler, TrainTrace};

/// What one DotMat step saw and applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Clamped dot product before the update.
    pub x: f64,
    /// `x^x`.
    pub power: f64,
    /// `sign(x^x - target)`, with `sign(0) = 0`.
    pub sign: f64,
    /// `x^x * sign * (1 + ln x)`; the gradient w.r.t. `U` is `coefficient * V`.
    pub coefficient: f64,
}

/// Gradient coefficient of `|x^x - target|` at clamped dot `x`.
#[inline]
pub fn dotmat_coefficient(x: f64, target: f64) -> StepInfo {
    let power = x.powf(x);
    let s = sign(power - target);
    StepInfo {
        x,
        power,
        sign: s,
        coefficient: power * s * (1.0 + x.ln()),
    }
}

#[inline]
fn step_rows(model: &mut FactorModel, ui: usize, ii: usize, target: Option<f64>, lr: f64, eps: f64) -> StepInfo {
    let x = clamp_unit(model.raw_dot(ui, ii), eps);
    let info = dotmat_coefficient(x, target.unwrap_or(x));
    if info.coefficient != 0.0 {
        let (u, v) = model.rows_mut(ui, ii);
        snapshot_update(u, v, lr * info.coefficient, true);
    }
    info
}

/// One rating-supervised step towards `x^x = rating / r_max`.
pub fn dotmat_step_supervised(
    model: &mut FactorModel,
    user: UserId,
    item: ItemId,
    rating: f64,
    r_max: f64,
    lr: f64,
    eps: f64,
) -> Result<StepInfo> {
    check_lr(lr)?;
    check_eps(eps)?;
    if r_max.is_nan() || r_max <= 0.0 || rating > r_max {
        return Err(Error::config(format!(
            "rating {rating} not within (0, r_max = {r_max}]"
        )));
    }
    let ui = model.user_idx(user)?;
    let ii = model.item_idx(item)?;
    Ok(step_rows(model, ui, ii, Some(rating / r_max), lr, eps))
}

/// One data-free step: the target is the clamped dot product itself.
pub fn dotmat_step_datafree(
    model: &mut FactorModel,
    user: UserId,
    item: ItemId,
    lr: f64,
    eps: f64,
) -> Result<StepInfo> {
    check_lr(lr)?;
    check_eps(eps)?;
    let ui = model.user_idx(user)?;
    let ii = model.item_idx(item)?;
    Ok(step_rows(model, ui, ii, None, lr, eps))
}

/// Mean of `|x^x - r / r_max|` over the dataset's triples.
pub fn dotmat_loss(model: &FactorModel, dataset: &InteractionDataset) -> Result<f64> {
    dotmat_loss_with_eps(model, dataset, DEFAULT_CLAMP_EPS)
}

pub fn dotmat_loss_with_eps(model: &FactorModel, dataset: &InteractionDataset, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if dataset.is_empty() {
        return Err(Error::Degenerate("loss over an empty dataset".into()));
    }
    let r_max = dataset.r_max();
    let mut total = 0.0;
    for t in dataset.triples() {
        let x = clamp_unit(model.raw_dot(model.user_idx(t.user)?, model.item_idx(t.item)?), eps);
        total += (x.powf(x) - t.rating / r_max).abs();
    }
    Ok(total / dataset.len() as f64)
}

/// Runs `config.epochs` epochs of data-free steps on an existing model.
pub fn fit_dotmat(
    model: &mut FactorModel,
    config: &TrainConfig,
    mut observe: impl FnMut(&StepInfo),
) -> Result<TrainTrace> {
    config.validate()?;
    let sampler = PairSampler::new(
        model.user_ids().len(),
        model.item_ids().len(),
        crate::seed::derive_seed(&[config.seed, 0xd07]),
        config.pairs_per_user,
    )?;
    let mut trace = TrainTrace::default();
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let mut loss_sum = 0.0;
        let mut visited = 0;
        for (ui, ii) in sampler.epoch(epoch) {
            let info = step_rows(model, ui, ii, None, config.learning_rate, config.clamp_eps);
            loss_sum += (info.power - info.x).abs();
            visited += 1;
            observe(&info);
        }
        trace.record(epoch, loss_sum, visited, started);
    }
    Ok(trace)
}

/// Cold-start training: needs only the user and item universes.
pub fn train_dotmat(
    user_ids: &[UserId],
    item_ids: &[ItemId],
    config: &TrainConfig,
) -> Result<(FactorModel, TrainTrace)> {
    train_dotmat_observed(user_ids, item_ids, config, |_| {})
}

/// As [`train_dotmat`], calling `observe` after every step.
pub fn train_dotmat_observed(
    user_ids: &[UserId],
    item_ids: &[ItemId],
    config: &TrainConfig,
    observe: impl FnMut(&StepInfo),
) -> Result<(FactorModel, TrainTrace)> {
    config.validate()?;
    let mut model = init_model(user_ids, item_ids, config.dim, config.seed)?;
    let trace = fit_dotmat(&mut model, config, observe)?;
    Ok((model, trace))
}
