//! Matrix factorization toolkit built around DotMat, a cold-start trainer
//! that learns user and item factors without reading any rating, and
//! DotMat Hybrid, which densifies a sparse rating matrix with DotMat
//! predictions before classic matrix factorization.
//!
//! Baselines (classic MF, RankMat, GloVeMat, random, item mean), MAE and a
//! popularity-concentration metric, and a seeded grid runner complete the
//! evaluation loop.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod ids;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod persist;
pub mod predict;
pub mod seed;
pub mod train;

pub use dataset::{InteractionDataset, RatingTriple};
pub use error::{Error, Result};
pub use experiment::{run_grid, Algorithm, ExperimentReport, GridSpec, ReportRow};
pub use ids::{ItemId, UserId};
pub use ingest::{
    parse_csv, parse_movielens, popularity_ranks, sample_users, split_train_test, ColumnSpec, PopularityRanks,
    SplitDataset,
};
pub use metrics::{mae, matthew_degree, top_k, ExposureProfile, MatthewEffect, Prediction, PredictionSet};
pub use model::{clamped_dot, init_model, predict_rating, FactorModel, TrainConfig, DEFAULT_CLAMP_EPS};
pub use persist::{load_model, save_model};
pub use predict::{DotPredictor, Predictor};
