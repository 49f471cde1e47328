//! Classic matrix factorization: squared error on `r / r_max`, unclamped dot
//! product, no regularisation, no biases, no nonnegativity.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::SplitDataset;
use crate::model::{init_model, FactorModel, TrainConfig};
use crate::seed::derive_seed;

use super::{snapshot_update, TrainTrace};

/// Gradient coefficient of `(target - u.v)^2 / 2` w.r.t. `U` (times `V`):
/// `-(target - u.v)`. Descent therefore adds `lr * e * V`.
#[inline]
pub fn mf_coefficient(raw_dot: f64, target: f64) -> f64 {
    -(target - raw_dot)
}

pub fn fit_mf_classic(model: &mut FactorModel, split: &SplitDataset, config: &TrainConfig) -> Result<TrainTrace> {
    config.validate()?;
    let train = &split.train;
    if train.is_empty() {
        return Err(Error::config("classic MF needs a non-empty train split"));
    }
    if train.r_max().is_nan() || train.r_max() <= 0.0 {
        return Err(Error::config("r_max must be positive"));
    }
    let rows = train
        .triples()
        .iter()
        .map(|t| {
            Ok((
                model.user_idx(t.user)?,
                model.item_idx(t.item)?,
                t.rating / train.r_max(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut trace = TrainTrace::default();
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, 0x3f, epoch as u64]));
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &n in &order {
            let (ui, ii, target) = rows[n];
            let c = mf_coefficient(model.raw_dot(ui, ii), target);
            loss_sum += c * c;
            if c != 0.0 {
                let (u, v) = model.rows_mut(ui, ii);
                snapshot_update(u, v, config.learning_rate * c, false);
            }
        }
        trace.record(epoch, loss_sum, rows.len(), started);
    }
    Ok(trace)
}

pub fn train_mf_classic(split: &SplitDataset, config: &TrainConfig) -> Result<(FactorModel, TrainTrace)> {
    config.validate()?;
    let mut model = init_model(split.users(), split.items(), config.dim, config.seed)?;
    let trace = fit_mf_classic(&mut model, split, config)?;
    Ok((model, trace))
}
