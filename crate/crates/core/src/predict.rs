use crate::error::Result;
use crate::ids::{ItemId, UserId};
use crate::model::{check_eps, FactorModel, DEFAULT_CLAMP_EPS};

/// Anything that maps a `(user, item)` pair to a rating on the dataset scale.
pub trait Predictor: Send + Sync {
    fn predict(&self, user: UserId, item: ItemId) -> Result<f64>;
}

/// `r_max * clamped_dot(U, V)`; used by DotMat, DotMat Hybrid and classic MF.
#[derive(Debug, Clone)]
pub struct DotPredictor {
    pub model: FactorModel,
    pub r_max: f64,
    pub eps: f64,
}

impl DotPredictor {
    pub fn new(model: FactorModel, r_max: f64) -> Self {
        DotPredictor {
            model,
            r_max,
            eps: DEFAULT_CLAMP_EPS,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        self.eps = eps;
        Ok(self)
    }
}

impl Predictor for DotPredictor {
    fn predict(&self, user: UserId, item: ItemId) -> Result<f64> {
        self.model.predict_rating_with_eps(user, item, self.r_max, self.eps)
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn predict(&self, user: UserId, item: ItemId) -> Result<f64> {
        (**self).predict(user, item)
    }
}
