//! DotMat Hybrid: fill every unobserved train cell with a data-free DotMat
//! prediction, then run classic MF on the dense matrix.

use std::collections::HashMap;

use crate::dataset::{InteractionDataset, RatingTriple};
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};
use crate::ingest::SplitDataset;
use crate::model::{FactorModel, TrainConfig};

use super::{train_dotmat, train_mf_classic, TrainTrace};

/// Returns a dataset with exactly `|users| * |items|` triples: the observed
/// ones from `base`, bit for bit, and `predict_rating(model, u, i, r_max)`
/// everywhere else. Triples are ordered by user, then item, in universe
/// order.
pub fn densify(
    model: &FactorModel,
    base: &InteractionDataset,
    user_ids: &[UserId],
    item_ids: &[ItemId],
) -> Result<InteractionDataset> {
    let r_max = base.r_max();
    if r_max.is_nan() || r_max <= 0.0 {
        return Err(Error::config("densify needs a positive r_max"));
    }
    let mut observed: HashMap<(UserId, ItemId), &RatingTriple> = HashMap::with_capacity(base.len());
    for t in base.triples() {
        observed.insert((t.user, t.item), t);
    }
    let item_rows = item_ids
        .iter()
        .map(|&i| model.item_idx(i))
        .collect::<Result<Vec<_>>>()?;
    let eps = crate::model::DEFAULT_CLAMP_EPS;
    let mut triples = Vec::with_capacity(user_ids.len() * item_ids.len());
    let mut used = 0;
    for &user in user_ids {
        let ui = model.user_idx(user)?;
        for (&item, &ii) in item_ids.iter().zip(&item_rows) {
            match observed.get(&(user, item)) {
                Some(t) => {
                    triples.push(**t);
                    used += 1;
                }
                None => {
                    let x = crate::model::clamp_unit(model.raw_dot(ui, ii), eps);
                    triples.push(RatingTriple::new(user, item, r_max * x));
                }
            }
        }
    }
    if used != base.len() {
        return Err(Error::config(format!(
            "{} observed triples fall outside the densified universes",
            base.len() - used
        )));
    }
    InteractionDataset::new(user_ids.iter().copied(), item_ids.iter().copied(), triples, r_max)
}

/// Data-free DotMat over the split's universes, densification of the train
/// side only, then classic MF. Test triples are never touched.
pub fn train_dotmat_hybrid(
    split: &SplitDataset,
    config_dotmat: &TrainConfig,
    config_mf: &TrainConfig,
) -> Result<(FactorModel, TrainTrace)> {
    let (cold, _) = train_dotmat(split.users(), split.items(), config_dotmat)?;
    let dense = densify(&cold, &split.train, split.users(), split.items())?;
    let dense_split = SplitDataset {
        train: dense,
        test: split.test.clone(),
    };
    train_mf_classic(&dense_split, config_mf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_model;
    use crate::train::fit_mf_classic;

    fn ids(n: u64) -> (Vec<UserId>, Vec<ItemId>) {
        ((0..n).map(UserId).collect(), (0..n).map(ItemId).collect())
    }

    #[test]
    fn complete_base_is_unchanged() {
        let (u, i) = ids(3);
        let triples: Vec<RatingTriple> = u
            .iter()
            .flat_map(|&a| {
                i.iter()
                    .map(move |&b| RatingTriple::new(a, b, 1.0 + (a.0 + b.0) as f64))
            })
            .collect();
        let base = InteractionDataset::from_triples(triples, Some(5.0)).unwrap();
        let m = init_model(&u, &i, 2, 1).unwrap();
        assert_eq!(densify(&m, &base, &u, &i).unwrap(), base);
    }

    #[test]
    fn fills_missing_cells() {
        let users: Vec<UserId> = (0..3).map(UserId).collect();
        let items: Vec<ItemId> = (0..4).map(ItemId).collect();
        let observed = vec![
            RatingTriple {
                timestamp: Some(9),
                ..RatingTriple::new(0u64, 0u64, 4.0)
            },
            RatingTriple::new(0u64, 3u64, 1.0),
            RatingTriple::new(1u64, 1u64, 2.5),
            RatingTriple::new(2u64, 2u64, 5.0),
            RatingTriple::new(2u64, 3u64, 3.0),
        ];
        let base = InteractionDataset::new(users.clone(), items.clone(), observed.clone(), 5.0).unwrap();
        let m = init_model(&users, &items, 3, 2).unwrap();
        let dense = densify(&m, &base, &users, &items).unwrap();
        assert_eq!(dense.len(), 12);
        for t in &observed {
            let got = dense
                .triples()
                .iter()
                .find(|d| d.user == t.user && d.item == t.item)
                .unwrap();
            assert_eq!(got.rating.to_bits(), t.rating.to_bits());
            assert_eq!(got.timestamp, t.timestamp);
        }
        let synthetic = dense
            .triples()
            .iter()
            .filter(|t| !base.pairs().contains(&(t.user, t.item)));
        for t in synthetic {
            let expected = m.predict_rating(t.user, t.item, 5.0).unwrap();
            assert_eq!(t.rating, expected);
        }
    }

    #[test]
    fn synthetic_ratings_in_range() {
        let (u, i) = ids(20);
        let base =
            InteractionDataset::new(u.clone(), i.clone(), vec![RatingTriple::new(0u64, 0u64, 3.0)], 5.0).unwrap();
        let m = init_model(&u, &i, 4, 8).unwrap();
        let dense = densify(&m, &base, &u, &i).unwrap();
        assert_eq!(dense.len(), 400);
        assert!(dense.triples().iter().all(|t| t.rating > 0.0 && t.rating <= 5.0));
    }

    #[test]
    fn missing_universe_member_is_lookup_error() {
        let (u, i) = ids(2);
        let base = InteractionDataset::new(u.clone(), i.clone(), vec![], 5.0).unwrap();
        let m = init_model(&u, &i, 2, 1).unwrap();
        assert!(matches!(
            densify(&m, &base, &[UserId(0), UserId(7)], &i),
            Err(Error::Lookup { kind: "user", id: 7 })
        ));
    }

    #[test]
    fn fully_cold_split_trains_on_synthetic_cells() {
        let (u, i) = ids(2);
        let train = InteractionDataset::new(u.clone(), i.clone(), vec![], 5.0).unwrap();
        let split = SplitDataset::train_only(train).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            dim: 2,
            pairs_per_user: 4,
            ..Default::default()
        };
        let (cold, _) = train_dotmat(&u, &i, &cfg).unwrap();
        let dense = densify(&cold, &split.train, &u, &i).unwrap();
        assert_eq!(dense.len(), 4);
        let (m, trace) = train_dotmat_hybrid(&split, &cfg, &cfg).unwrap();
        assert_eq!(trace.epochs.len(), 3);
        assert_eq!(m.user_ids(), &u[..]);
    }

    #[test]
    fn zero_dotmat_epochs_equals_mf_on_init_densification() {
        let users: Vec<UserId> = (0..4).map(UserId).collect();
        let items: Vec<ItemId> = (0..5).map(ItemId).collect();
        let train = InteractionDataset::new(
            users.clone(),
            items.clone(),
            vec![RatingTriple::new(0u64, 1u64, 4.0), RatingTriple::new(3u64, 4u64, 2.0)],
            5.0,
        )
        .unwrap();
        let split = SplitDataset::train_only(train.clone()).unwrap();
        let cfg_d = TrainConfig {
            epochs: 0,
            dim: 3,
            seed: 5,
            ..Default::default()
        };
        let cfg_mf = TrainConfig {
            epochs: 7,
            dim: 3,
            seed: 6,
            learning_rate: 0.05,
            ..Default::default()
        };
        let (hybrid, _) = train_dotmat_hybrid(&split, &cfg_d, &cfg_mf).unwrap();

        let init = init_model(&users, &items, 3, 5).unwrap();
        let dense = densify(&init, &train, &users, &items).unwrap();
        let mut mf = init_model(&users, &items, 3, 6).unwrap();
        fit_mf_classic(&mut mf, &SplitDataset::train_only(dense).unwrap(), &cfg_mf).unwrap();
        assert_eq!(hybrid, mf);
    }
}
