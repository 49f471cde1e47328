//! Latent factor model, the clamped dot product and rating reconstruction.
//!
//! A dot product `x = u·v` is read as a Zipf probability, so every consumer
//! sees it projected into `[eps, 1 - eps]`. Powers `x^x` and logarithms
//! `ln x` used by the trainers stay finite on that interval.

use std::collections::HashMap;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

pub const DEFAULT_CLAMP_EPS: f64 = 1e-6;

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn clamp_unit(x: f64, eps: f64) -> f64 {
    x.max(eps).min(1.0 - eps)
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::config(format!("clamp eps must lie in (0, 0.5), got {eps}")))
    }
}

/// `min(max(u·v, eps), 1 - eps)`.
pub fn clamped_dot(u: &[f64], v: &[f64], eps: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            actual: v.len(),
        });
    }
    check_eps(eps)?;
    Ok(clamp_unit(dot(u, v), eps))
}

/// Per-user and per-item factor vectors of a common dimension `k`.
///
/// Factors are stored row-major in one flat buffer per side; ids keep the
/// order they were given at construction, which is also the order used by
/// persistence.
#[derive(Debug, Clone)]
pub struct FactorModel {
    k: usize,
    user_ids: Vec<UserId>,
    item_ids: Vec<ItemId>,
    user_index: HashMap<UserId, usize>,
    item_index: HashMap<ItemId, usize>,
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
}

fn index_of<T>(ids: &[T], kind: &'static str) -> Result<HashMap<T, usize>>
where
    T: Copy + Eq + std::hash::Hash + std::fmt::Display,
{
    let mut index = HashMap::with_capacity(ids.len());
    for (i, &id) in ids.iter().enumerate() {
        if index.insert(id, i).is_some() {
            return Err(Error::Integrity(format!("duplicate {kind} id {id}")));
        }
    }
    Ok(index)
}

impl FactorModel {
    /// Builds a model from explicit vectors, checking dimensions, finiteness
    /// and id uniqueness.
    pub fn from_parts(k: usize, users: Vec<(UserId, Vec<f64>)>, items: Vec<(ItemId, Vec<f64>)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("latent dimension must be at least 1"));
        }
        let mut user_ids = Vec::with_capacity(users.len());
        let mut user_factors = Vec::with_capacity(users.len() * k);
        for (id, v) in users {
            if v.len() != k {
                return Err(Error::Integrity(format!(
                    "user {id} has {} entries, expected {k}",
                    v.len()
                )));
            }
            user_ids.push(id);
            user_factors.extend(v);
        }
        let mut item_ids = Vec::with_capacity(items.len());
        let mut item_factors = Vec::with_capacity(items.len() * k);
        for (id, v) in items {
            if v.len() != k {
                return Err(Error::Integrity(format!(
                    "item {id} has {} entries, expected {k}",
                    v.len()
                )));
            }
            item_ids.push(id);
            item_factors.extend(v);
        }
        if let Some(bad) = user_factors.iter().chain(&item_factors).find(|x| !x.is_finite()) {
            return Err(Error::Integrity(format!("non-finite factor entry {bad}")));
        }
        Ok(FactorModel {
            k,
            user_index: index_of(&user_ids, "user")?,
            item_index: index_of(&item_ids, "item")?,
            user_ids,
            item_ids,
            user_factors,
            item_factors,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn user_ids(&self) -> &[UserId] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[ItemId] {
        &self.item_ids
    }

    pub fn user_idx(&self, id: UserId) -> Result<usize> {
        self.user_index
            .get(&id)
            .copied()
            .ok_or(Error::Lookup { kind: "user", id: id.0 })
    }

    pub fn item_idx(&self, id: ItemId) -> Result<usize> {
        self.item_index
            .get(&id)
            .copied()
            .ok_or(Error::Lookup { kind: "item", id: id.0 })
    }

    pub fn user_vector(&self, id: UserId) -> Result<&[f64]> {
        Ok(self.user_row(self.user_idx(id)?))
    }

    pub fn item_vector(&self, id: ItemId) -> Result<&[f64]> {
        Ok(self.item_row(self.item_idx(id)?))
    }

    #[inline]
    pub fn user_row(&self, idx: usize) -> &[f64] {
        &self.user_factors[idx * self.k..(idx + 1) * self.k]
    }

    #[inline]
    pub fn item_row(&self, idx: usize) -> &[f64] {
        &self.item_factors[idx * self.k..(idx + 1) * self.k]
    }

    /// Mutable access to one user row and one item row at once.
    #[inline]
    pub fn rows_mut(&mut self, user_idx: usize, item_idx: usize) -> (&mut [f64], &mut [f64]) {
        let k = self.k;
        (
            &mut self.user_factors[user_idx * k..(user_idx + 1) * k],
            &mut self.item_factors[item_idx * k..(item_idx + 1) * k],
        )
    }

    /// Raw (unclamped) dot product by row index.
    #[inline]
    pub fn raw_dot(&self, user_idx: usize, item_idx: usize) -> f64 {
        dot(self.user_row(user_idx), self.item_row(item_idx))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.user_factors.iter().chain(&self.item_factors).all(|&x| x >= 0.0)
    }

    pub fn all_finite(&self) -> bool {
        self.user_factors
            .iter()
            .chain(&self.item_factors)
            .all(|x| x.is_finite())
    }

    /// `r_max * clamped_dot(U_user, V_item)` with the default clamp.
    pub fn predict_rating(&self, user: UserId, item: ItemId, r_max: f64) -> Result<f64> {
        self.predict_rating_with_eps(user, item, r_max, DEFAULT_CLAMP_EPS)
    }

    pub fn predict_rating_with_eps(&self, user: UserId, item: ItemId, r_max: f64, eps: f64) -> Result<f64> {
        let ui = self.user_idx(user)?;
        let ii = self.item_idx(item)?;
        check_eps(eps)?;
        Ok(r_max * clamp_unit(self.raw_dot(ui, ii), eps))
    }
}

/// Bitwise equality over dimension, id order and every factor entry.
impl PartialEq for FactorModel {
    fn eq(&self, other: &Self) -> bool {
        fn same_bits(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        }
        self.k == other.k
            && self.user_ids == other.user_ids
            && self.item_ids == other.item_ids
            && same_bits(&self.user_factors, &other.user_factors)
            && same_bits(&self.item_factors, &other.item_factors)
    }
}

/// Free-function form of [`FactorModel::predict_rating`].
pub fn predict_rating(model: &FactorModel, user: UserId, item: ItemId, r_max: f64) -> Result<f64> {
    model.predict_rating(user, item, r_max)
}

/// Draws every entry independently from `Uniform(0, 1/sqrt(k))`.
///
/// The expected entry product is `1/(4k)`, so the expected dot product is
/// `0.25` for any `k`. User entries are drawn first, in id order, then
/// item entries.
pub fn init_model(user_ids: &[UserId], item_ids: &[ItemId], k: usize, seed: u64) -> Result<FactorModel> {
    if k == 0 {
        return Err(Error::config("latent dimension must be at least 1"));
    }
    if user_ids.is_empty() || item_ids.is_empty() {
        return Err(Error::config("cannot initialise a model over an empty id set"));
    }
    let scale = 1.0 / (k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.sample::<f64, _>(Open01) * scale).collect() };
    let user_factors = draw(user_ids.len() * k);
    let item_factors = draw(item_ids.len() * k);
    Ok(FactorModel {
        k,
        user_index: index_of(user_ids, "user").map_err(|e| Error::config(e.to_string()))?,
        item_index: index_of(item_ids, "item").map_err(|e| Error::config(e.to_string()))?,
        user_ids: user_ids.to_vec(),
        item_ids: item_ids.to_vec(),
        user_factors,
        item_factors,
    })
}

/// Hyperparameters shared by every trainer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dim: usize,
    pub clamp_eps: f64,
    pub seed: u64,
    /// Items drawn per user per epoch by the data-free pair stream.
    pub pairs_per_user: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 20,
            dim: 16,
            clamp_eps: DEFAULT_CLAMP_EPS,
            seed: 42,
            pairs_per_user: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.dim == 0 {
            return Err(Error::config("latent dimension must be at least 1"));
        }
        if self.pairs_per_user == 0 {
            return Err(Error::config("pairs_per_user must be at least 1"));
        }
        check_eps(self.clamp_eps)
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }
}
