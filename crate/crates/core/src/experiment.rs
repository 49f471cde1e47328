//! Grid runner: sample users, split, train every (algorithm, learning rate)
//! cell on the same split, and score MAE and the Matthew-effect degree.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::InteractionDataset;
use crate::error::{Error, Result};
use crate::ids::UserId;
use crate::ingest::{popularity_ranks, sample_users, split_train_test, PopularityRanks, SplitDataset};
use crate::metrics::{mae, matthew_degree, predict_all, top_k, ExposureProfile};
use crate::model::{TrainConfig, DEFAULT_CLAMP_EPS};
use crate::predict::{DotPredictor, Predictor};
use crate::seed::{derive_seed, derive_seed_str};
use crate::train::{
    train_dotmat, train_dotmat_hybrid, train_glovemat, train_mf_classic, train_rankmat, GloveMatPredictor,
    MeanBaseline, RandomBaseline, RankMatPredictor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dotmat,
    DotmatHybrid,
    Mf,
    Rankmat,
    Glovemat,
    Random,
    Mean,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Dotmat,
        Algorithm::DotmatHybrid,
        Algorithm::Mf,
        Algorithm::Rankmat,
        Algorithm::Glovemat,
        Algorithm::Random,
        Algorithm::Mean,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dotmat => "dotmat",
            Algorithm::DotmatHybrid => "dotmat-hybrid",
            Algorithm::Mf => "mf",
            Algorithm::Rankmat => "rankmat",
            Algorithm::Glovemat => "glovemat",
            Algorithm::Random => "random",
            Algorithm::Mean => "mean",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| Error::config(format!("unknown algorithm `{s}`")))
    }
}

/// Trains `algorithm` on `split` and returns a predictor on the rating scale.
/// `ranks` is required for RankMat only.
pub fn train_predictor(
    algorithm: Algorithm,
    split: &SplitDataset,
    ranks: Option<&PopularityRanks>,
    config: &TrainConfig,
) -> Result<Box<dyn Predictor>> {
    let r_max = split.r_max();
    let dot = |model| -> Result<Box<dyn Predictor>> {
        Ok(Box::new(DotPredictor::new(model, r_max).with_eps(config.clamp_eps)?))
    };
    match algorithm {
        Algorithm::Dotmat => dot(train_dotmat(split.users(), split.items(), config)?.0),
        Algorithm::DotmatHybrid => dot(train_dotmat_hybrid(split, config, config)?.0),
        Algorithm::Mf => dot(train_mf_classic(split, config)?.0),
        Algorithm::Rankmat => {
            let ranks = ranks.ok_or_else(|| Error::config("RankMat needs popularity ranks"))?;
            let (model, _) = train_rankmat(split, ranks, config)?;
            let mut p = RankMatPredictor::new(model, ranks.clone(), r_max);
            p.eps = config.clamp_eps;
            Ok(Box::new(p))
        }
        Algorithm::Glovemat => Ok(Box::new(GloveMatPredictor {
            model: train_glovemat(split, config)?.0,
            r_max,
        })),
        Algorithm::Random => Ok(Box::new(RandomBaseline::new(config.seed, r_max))),
        Algorithm::Mean => Ok(Box::new(MeanBaseline::fit(&split.train)?)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub algorithms: Vec<Algorithm>,
    pub learning_rates: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub dim: usize,
    pub epochs: usize,
    pub test_fraction: f64,
    pub top_k: usize,
    pub pairs_per_user: usize,
    pub clamp_eps: f64,
    pub seed: u64,
    /// Wall-clock training time is nondeterministic; when off, the
    /// `train_seconds` column is written as 0.
    pub record_timings: bool,
}

pub const DEFAULT_LEARNING_RATES: [f64; 6] = [0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05];

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            algorithms: vec![Algorithm::Dotmat, Algorithm::DotmatHybrid, Algorithm::Mf],
            learning_rates: DEFAULT_LEARNING_RATES.to_vec(),
            sample_sizes: vec![100, 1000, 2000],
            dim: 16,
            epochs: 20,
            test_fraction: 0.2,
            top_k: 10,
            pairs_per_user: 100,
            clamp_eps: DEFAULT_CLAMP_EPS,
            seed: 42,
            record_timings: false,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::config("grid needs at least one algorithm"));
        }
        if self.learning_rates.is_empty() {
            return Err(Error::config("grid needs at least one learning rate"));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::config("grid needs at least one sample size"));
        }
        if let Some(lr) = self.learning_rates.iter().find(|&&lr| !(lr > 0.0 && lr.is_finite())) {
            return Err(Error::config(format!("learning rate {lr} is not positive")));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::config("sample sizes must be positive"));
        }
        if self.top_k == 0 {
            return Err(Error::config("top_k must be at least 1"));
        }
        self.cell_config(0.01, 0).validate()
    }

    fn cell_config(&self, learning_rate: f64, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate,
            epochs: self.epochs,
            dim: self.dim,
            clamp_eps: self.clamp_eps,
            seed,
            pairs_per_user: self.pairs_per_user,
        }
    }

    /// Seed for one cell; independent of which other cells exist.
    pub fn cell_seed(&self, sample_size: usize, algorithm: Algorithm, learning_rate: f64) -> u64 {
        derive_seed(&[
            derive_seed_str(self.seed, algorithm.as_str()),
            sample_size as u64,
            learning_rate.to_bits(),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    pub sample_size: usize,
    pub mae: f64,
    pub matthew_degree: f64,
    pub train_seconds: f64,
    pub seed: u64,
    /// Items with zero top-K exposure, excluded from the Matthew fit.
    pub matthew_zero_excluded: usize,
    /// Digest of the train/test split the cell was scored on.
    pub split_digest: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: [&str; 7] = [
    "algorithm",
    "learning_rate",
    "sample_size",
    "mae",
    "matthew_degree",
    "train_seconds",
    "seed",
];

impl ExperimentReport {
    pub fn emit_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.algorithm.to_string(),
                r.learning_rate.to_string(),
                r.sample_size.to_string(),
                r.mae.to_string(),
                r.matthew_degree.to_string(),
                r.train_seconds.to_string(),
                r.seed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn emit_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn from_json<R: std::io::Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }
}

struct SampleContext {
    sample_size: usize,
    split: SplitDataset,
    ranks: Option<PopularityRanks>,
    test_users: Vec<UserId>,
    exclude: std::collections::HashSet<(UserId, crate::ids::ItemId)>,
    digest: u64,
}

fn prepare(dataset: &InteractionDataset, spec: &GridSpec, sample_size: usize) -> Result<SampleContext> {
    let sample = sample_users(
        dataset,
        sample_size,
        derive_seed_str(spec.seed ^ sample_size as u64, "sample"),
    )?;
    let split = split_train_test(
        &sample,
        spec.test_fraction,
        derive_seed_str(spec.seed ^ sample_size as u64, "split"),
    )?;
    let ranks = if spec.algorithms.contains(&Algorithm::Rankmat) {
        Some(popularity_ranks(&split.train)?)
    } else {
        None
    };
    let mut test_users: Vec<UserId> = split.test.triples().iter().map(|t| t.user).collect();
    test_users.sort_unstable();
    test_users.dedup();
    Ok(SampleContext {
        sample_size,
        exclude: split.train.pairs(),
        digest: split.digest(),
        split,
        ranks,
        test_users,
    })
}

fn run_cell(ctx: &SampleContext, spec: &GridSpec, algorithm: Algorithm, learning_rate: f64) -> Result<ReportRow> {
    let seed = spec.cell_seed(ctx.sample_size, algorithm, learning_rate);
    let config = spec.cell_config(learning_rate, seed);
    let started = Instant::now();
    let predictor = train_predictor(algorithm, &ctx.split, ctx.ranks.as_ref(), &config)?;
    let train_seconds = if spec.record_timings {
        started.elapsed().as_secs_f64()
    } else {
        0.0
    };
    let preds = predict_all(&predictor, &ctx.split.test)?;
    let lists = top_k(&predictor, &ctx.test_users, ctx.split.items(), spec.top_k, &ctx.exclude)?;
    let exposure = ExposureProfile::from_lists(spec.top_k, &lists, ctx.split.items());
    let matthew = matthew_degree(&exposure)?;
    Ok(ReportRow {
        algorithm,
        learning_rate,
        sample_size: ctx.sample_size,
        mae: mae(&preds)?,
        matthew_degree: matthew.degree,
        train_seconds,
        seed,
        matthew_zero_excluded: matthew.zero_excluded,
        split_digest: ctx.digest,
    })
}

/// Runs every `(sample size, algorithm, learning rate)` cell. Rows come out
/// in that nesting order, following the order of the grid's lists. Cells of
/// one sample size run in parallel and share one split.
pub fn run_grid(dataset: &InteractionDataset, spec: &GridSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(Error::config("grid needs a non-empty dataset"));
    }
    let mut rows = Vec::new();
    for &sample_size in &spec.sample_sizes {
        let ctx = prepare(dataset, spec, sample_size)?;
        info!(
            "sample {sample_size}: {} train / {} test triples over {} items",
            ctx.split.train.len(),
            ctx.split.test.len(),
            ctx.split.items().len()
        );
        let cells: Vec<(Algorithm, f64)> = spec
            .algorithms
            .iter()
            .flat_map(|&a| spec.learning_rates.iter().map(move |&lr| (a, lr)))
            .collect();
        let results: Vec<Result<ReportRow>> = cells
            .par_iter()
            .map(|&(algorithm, lr)| {
                run_cell(&ctx, spec, algorithm, lr).map_err(|e| Error::Cell {
                    sample_size,
                    algorithm: algorithm.to_string(),
                    learning_rate: lr,
                    source: Box::new(e),
                })
            })
            .collect();
        for r in results {
            let row = r?;
            info!(
                "{} lr={} n={}: mae={:.4} matthew={:.4}",
                row.algorithm, row.learning_rate, row.sample_size, row.mae, row.matthew_degree
            );
            rows.push(row);
        }
    }
    Ok(ExperimentReport { rows })
}
