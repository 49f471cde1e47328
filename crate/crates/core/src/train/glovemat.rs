//! GloVeMat baseline: `(u.v - ln(r + 1))^2` on the raw rating scale.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::ingest::SplitDataset;
use crate::model::{init_model, FactorModel, TrainConfig};
use crate::predict::Predictor;
use crate::seed::derive_seed;

use super::{snapshot_update, TrainTrace};

#[inline]
pub fn glovemat_target(rating: f64) -> f64 {
    rating.ln_1p()
}

/// Gradient coefficient w.r.t. `U` (times `V`): `2 (u.v - ln(r + 1))`.
#[inline]
pub fn glovemat_coefficient(raw_dot: f64, rating: f64) -> f64 {
    2.0 * (raw_dot - glovemat_target(rating))
}

#[inline]
pub fn glovemat_loss(raw_dot: f64, rating: f64) -> f64 {
    let e = raw_dot - glovemat_target(rating);
    e * e
}

pub fn fit_glovemat(model: &mut FactorModel, split: &SplitDataset, config: &TrainConfig) -> Result<TrainTrace> {
    config.validate()?;
    let train = &split.train;
    if train.is_empty() {
        return Err(Error::config("GloVeMat needs a non-empty train split"));
    }
    let rows = train
        .triples()
        .iter()
        .map(|t| Ok((model.user_idx(t.user)?, model.item_idx(t.item)?, t.rating)))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut trace = TrainTrace::default();
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, 0x61, epoch as u64]));
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &n in &order {
            let (ui, ii, rating) = rows[n];
            let dot = model.raw_dot(ui, ii);
            loss_sum += glovemat_loss(dot, rating);
            let c = glovemat_coefficient(dot, rating);
            if c != 0.0 {
                let (u, v) = model.rows_mut(ui, ii);
                snapshot_update(u, v, config.learning_rate * c, false);
            }
        }
        trace.record(epoch, loss_sum, rows.len(), started);
    }
    Ok(trace)
}

pub fn train_glovemat(split: &SplitDataset, config: &TrainConfig) -> Result<(FactorModel, TrainTrace)> {
    config.validate()?;
    let mut model = init_model(split.users(), split.items(), config.dim, config.seed)?;
    let trace = fit_glovemat(&mut model, split, config)?;
    Ok((model, trace))
}

/// Inverts the log target: `exp(u.v) - 1`, clamped to `[0, r_max]`.
#[derive(Debug, Clone)]
pub struct GloveMatPredictor {
    pub model: FactorModel,
    pub r_max: f64,
}

impl Predictor for GloveMatPredictor {
    fn predict(&self, user: UserId, item: ItemId) -> Result<f64> {
        let dot = self
            .model
            .raw_dot(self.model.user_idx(user)?, self.model.item_idx(item)?);
        Ok(dot.exp_m1().clamp(0.0, self.r_max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{InteractionDataset, RatingTriple};
    use rand::Rng;

    #[test]
    fn zero_rating_target_is_zero() {
        assert_eq!(glovemat_target(0.0), 0.0);
        assert_eq!(glovemat_coefficient(0.0, 0.0), 0.0);
    }

    #[test]
    fn exact_fit_is_fixed_point() {
        let r = 3.0f64;
        let target = r.ln_1p();
        let mut m = FactorModel::from_parts(1, vec![(UserId(1), vec![target])], vec![(ItemId(1), vec![1.0])]).unwrap();
        let ds = InteractionDataset::from_triples(vec![RatingTriple::new(1u64, 1u64, r)], Some(5.0)).unwrap();
        let before = m.clone();
        fit_glovemat(&mut m, &SplitDataset::train_only(ds).unwrap(), &TrainConfig::default()).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = 1e-6;
        let loss = |u: &[f64], v: &[f64], r: f64| {
            let x: f64 = u.iter().zip(v).map(|(p, q)| p * q).sum();
            (x - (r + 1.0).ln()).powi(2)
        };
        for _ in 0..100 {
            let k = 5;
            let u: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = rng.gen_range(1..=5) as f64;
            let x: f64 = u.iter().zip(&v).map(|(p, q)| p * q).sum();
            let c = glovemat_coefficient(x, r);
            for j in 0..k {
                let (mut up, mut um) = (u.clone(), u.clone());
                up[j] += h;
                um[j] -= h;
                let fd = (loss(&up, &v, r) - loss(&um, &v, r)) / (2.0 * h);
                let analytic = c * v[j];
                let rel = (fd - analytic).abs() / analytic.abs().max(1e-8);
                assert!(rel < 1e-5, "rel {rel}");
            }
        }
    }

    #[test]
    fn learns_log_targets() {
        let triples = vec![
            RatingTriple::new(1u64, 1u64, 4.0),
            RatingTriple::new(1u64, 2u64, 2.0),
            RatingTriple::new(2u64, 1u64, 5.0),
        ];
        let ds = InteractionDataset::from_triples(triples, None).unwrap();
        let split = SplitDataset::train_only(ds).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.05,
            epochs: 2000,
            dim: 4,
            ..Default::default()
        };
        let (m, _) = train_glovemat(&split, &cfg).unwrap();
        let p = GloveMatPredictor { model: m, r_max: 5.0 };
        assert!((p.predict(UserId(1), ItemId(1)).unwrap() - 4.0).abs() < 0.05);
        assert!((p.predict(UserId(1), ItemId(2)).unwrap() - 2.0).abs() < 0.05);
        let v = p.predict(UserId(2), ItemId(2)).unwrap();
        assert!((0.0..=5.0).contains(&v));
    }
}
