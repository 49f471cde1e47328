use std::collections::HashMap;

use crate::dataset::InteractionDataset;
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::predict::Predictor;
use crate::seed::{derive_seed, unit_from_hash};

/// Uniform in `(0, r_max]`, hashed from `(seed, user, item)` so every pair
/// gets the same draw regardless of query order.
#[derive(Debug, Clone, Copy)]
pub struct RandomBaseline {
    pub seed: u64,
    pub r_max: f64,
}

impl RandomBaseline {
    pub fn new(seed: u64, r_max: f64) -> Self {
        RandomBaseline { seed, r_max }
    }
}

impl Predictor for RandomBaseline {
    fn predict(&self, user: UserId, item: ItemId) -> Result<f64> {
        let u = unit_from_hash(derive_seed(&[self.seed, user.0, item.0]));
        Ok(self.r_max * (1.0 - u))
    }
}

/// Per-item train mean, falling back to the global train mean.
#[derive(Debug, Clone)]
pub struct MeanBaseline {
    item_means: HashMap<ItemId, f64>,
    global_mean: f64,
}

impl MeanBaseline {
    pub fn fit(train: &InteractionDataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::config("mean baseline needs a non-empty train set"));
        }
        let mut sums: HashMap<ItemId, (f64, usize)> = HashMap::new();
        let mut total = 0.0;
        for t in train.triples() {
            let e = sums.entry(t.item).or_insert((0.0, 0));
            e.0 += t.rating;
            e.1 += 1;
            total += t.rating;
        }
        Ok(MeanBaseline {
            item_means: sums.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect(),
            global_mean: total / train.len() as f64,
        })
    }

    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }
}

impl Predictor for MeanBaseline {
    fn predict(&self, _user: UserId, item: ItemId) -> Result<f64> {
        Ok(self.item_means.get(&item).copied().unwrap_or(self.global_mean))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RatingTriple;

    #[test]
    fn mean_of_single_triple() {
        let ds = InteractionDataset::from_triples(vec![RatingTriple::new(1u64, 1u64, 3.5)], None).unwrap();
        let m = MeanBaseline::fit(&ds).unwrap();
        assert_eq!(m.predict(UserId(1), ItemId(1)).unwrap(), 3.5);
        assert_eq!(m.predict(UserId(9), ItemId(9)).unwrap(), 3.5);
    }

    #[test]
    fn unseen_item_uses_global_mean() {
        let ds = InteractionDataset::from_triples(
            vec![
                RatingTriple::new(1u64, 1u64, 5.0),
                RatingTriple::new(2u64, 1u64, 3.0),
                RatingTriple::new(1u64, 2u64, 1.0),
            ],
            None,
        )
        .unwrap();
        let m = MeanBaseline::fit(&ds).unwrap();
        assert_eq!(m.predict(UserId(1), ItemId(1)).unwrap(), 4.0);
        assert_eq!(m.predict(UserId(1), ItemId(3)).unwrap(), 3.0);
    }

    #[test]
    fn mean_rejects_empty() {
        let ds = InteractionDataset::from_triples(vec![], None).unwrap();
        assert!(matches!(MeanBaseline::fit(&ds), Err(Error::Config(_))));
    }

    #[test]
    fn random_is_reproducible_and_in_range() {
        let a = RandomBaseline::new(42, 5.0);
        let b = RandomBaseline::new(42, 5.0);
        let c = RandomBaseline::new(43, 5.0);
        let mut differs = false;
        for u in 0..50 {
            for i in 0..50 {
                let p = a.predict(UserId(u), ItemId(i)).unwrap();
                assert!(p > 0.0 && p <= 5.0);
                assert_eq!(p, b.predict(UserId(u), ItemId(i)).unwrap());
                differs |= p != c.predict(UserId(u), ItemId(i)).unwrap();
            }
        }
        assert!(differs);
    }
}
