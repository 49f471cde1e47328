//! Learning procedures.
//!
//! Every trainer comes in two forms: `fit_*` continues from a caller-owned
//! model, `train_*` initialises one with [`init_model`](crate::model::init_model)
//! and then fits it. All randomness is derived from `TrainConfig::seed`.

mod baseline;
mod dotmat;
mod glovemat;
mod hybrid;
mod mf;
mod rankmat;

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub use baseline::{MeanBaseline, RandomBaseline};
pub use dotmat::{
    dotmat_coefficient, dotmat_loss, dotmat_loss_with_eps, dotmat_step_datafree, dotmat_step_supervised, fit_dotmat,
    train_dotmat, train_dotmat_observed, StepInfo,
};
pub use glovemat::{fit_glovemat, glovemat_coefficient, glovemat_loss, train_glovemat, GloveMatPredictor};
pub use hybrid::{densify, train_dotmat_hybrid};
pub use mf::{fit_mf_classic, mf_coefficient, train_mf_classic};
pub use rankmat::{fit_rankmat, rankmat_coefficient, rankmat_loss, train_rankmat, RankMatPredictor};

/// Uniform with-replacement stream of `(user row, item row)` index pairs:
/// every epoch each user is paired with `pairs_per_user` items.
#[derive(Debug, Clone)]
pub struct PairSampler {
    n_users: usize,
    n_items: usize,
    seed: u64,
    pairs_per_user: usize,
}

impl PairSampler {
    pub fn new(n_users: usize, n_items: usize, seed: u64, pairs_per_user: usize) -> Result<Self> {
        if n_users == 0 || n_items == 0 {
            return Err(Error::config("pair sampler needs non-empty universes"));
        }
        if pairs_per_user == 0 {
            return Err(Error::config("pairs_per_user must be at least 1"));
        }
        Ok(PairSampler {
            n_users,
            n_items,
            seed,
            pairs_per_user,
        })
    }

    pub fn pairs_per_epoch(&self) -> usize {
        self.n_users * self.pairs_per_user
    }

    /// The pairs for one epoch; a pure function of `(seed, epoch)`.
    pub fn epoch(&self, epoch: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[self.seed, epoch as u64]));
        let (per_user, n_items) = (self.pairs_per_user, self.n_items);
        (0..self.n_users)
            .flat_map(move |u| std::iter::repeat_n(u, per_user))
            .map(move |u| (u, rng.gen_range(0..n_items)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStat {
    pub epoch: usize,
    pub mean_loss: f64,
    pub seconds: f64,
}

/// Per-epoch mean loss over visited pairs and wall-clock time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainTrace {
    pub epochs: Vec<EpochStat>,
}

impl TrainTrace {
    pub(crate) fn record(&mut self, epoch: usize, loss_sum: f64, visited: usize, started: Instant) {
        let mean_loss = if visited == 0 { 0.0 } else { loss_sum / visited as f64 };
        self.epochs.push(EpochStat {
            epoch,
            mean_loss,
            seconds: started.elapsed().as_secs_f64(),
        });
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.mean_loss)
    }

    pub fn total_seconds(&self) -> f64 {
        self.epochs.iter().map(|e| e.seconds).sum()
    }

    /// CSV with header `epoch,mean_loss,seconds`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "mean_loss", "seconds"])
            .map_err(|e| Error::Io(e.into()))?;
        for e in &self.epochs {
            w.write_record([e.epoch.to_string(), e.mean_loss.to_string(), e.seconds.to_string()])
                .map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn check_lr(lr: f64) -> Result<()> {
    if lr > 0.0 && lr.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("learning rate must be positive, got {lr}")))
    }
}

/// `u -= lr * coef * v_old; v -= lr * coef * u_old`, coordinate-wise from
/// the pre-update snapshot, optionally flooring at zero.
#[inline]
pub(crate) fn snapshot_update(u: &mut [f64], v: &mut [f64], step: f64, floor: bool) {
    for (ua, va) in u.iter_mut().zip(v.iter_mut()) {
        let (u0, v0) = (*ua, *va);
        let (mut nu, mut nv) = (u0 - step * v0, v0 - step * u0);
        if floor {
            nu = nu.max(0.0);
            nv = nv.max(0.0);
        }
        *ua = nu;
        *va = nv;
    }
}

#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
