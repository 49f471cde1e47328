use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use dotmat::experiment::{Algorithm, GridSpec, DEFAULT_LEARNING_RATES};
use dotmat::ingest::{parse_csv_path, parse_movielens_path, ParseOutcome};
use dotmat::metrics::{mae, predict_all};
use dotmat::persist::{load_model_from_path, save_model_to_path};
use dotmat::predict::{DotPredictor, Predictor};
use dotmat::train::{
    densify, train_dotmat, train_dotmat_hybrid, train_glovemat, train_mf_classic, train_rankmat, GloveMatPredictor,
    RankMatPredictor, TrainTrace,
};
use dotmat::{popularity_ranks, split_train_test, ColumnSpec, InteractionDataset, SplitDataset, TrainConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "dotmat", version, about = "Cold-start matrix factorization toolkit")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a rating file and cache it as JSON.
    Ingest(IngestArgs),
    /// Train one model on a whole dataset (or its train split).
    Train(TrainArgs),
    /// Predict every triple of a dataset with a saved model.
    Predict(PredictArgs),
    /// Run the (sample size x algorithm x learning rate) grid.
    Grid(GridArgs),
    /// Fill every unobserved cell of a dataset with model predictions.
    Densify(DensifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    /// Pick by extension: .json cache, .dat MovieLens, .csv CSV.
    Auto,
    Movielens,
    Csv,
    Cache,
}

#[derive(Args, Clone)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: InputFormat,
    #[arg(long, default_value = "user_id")]
    user_col: String,
    #[arg(long, default_value = "item_id")]
    item_col: String,
    #[arg(long, default_value = "rating")]
    rating_col: String,
    #[arg(long)]
    timestamp_col: Option<String>,
    /// Override the rating ceiling inferred from the data.
    #[arg(long)]
    r_max: Option<f64>,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrainAlgo {
    Dotmat,
    Mf,
    Rankmat,
    Glovemat,
    DotmatHybrid,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    algo: TrainAlgo,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    pairs_per_user: usize,
    #[arg(long, default_value_t = dotmat::DEFAULT_CLAMP_EPS)]
    clamp_eps: f64,
    /// Hold out this fraction per user and report its MAE; 0 trains on everything.
    #[arg(long, default_value_t = 0.0)]
    test_fraction: f64,
    #[arg(long)]
    model_out: PathBuf,
    /// Write the per-epoch trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PredictRule {
    /// r_max * clamped dot (DotMat, DotMat Hybrid, MF).
    Dot,
    /// exp(dot) - 1 clamped to [0, r_max].
    Glovemat,
    /// r_max * (1 / (rank_u * rank_i))^dot; needs --rank-data.
    Rankmat,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "dot")]
    rule: PredictRule,
    /// Dataset whose popularity ranks the RankMat model was trained with.
    #[arg(long)]
    rank_data: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated: dotmat,dotmat-hybrid,mf,rankmat,glovemat,random,mean
    #[arg(long, value_delimiter = ',', default_value = "dotmat,dotmat-hybrid,mf")]
    algos: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    lrs: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,2000")]
    samples: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long, default_value_t = 100)]
    pairs_per_user: usize,
    /// Record wall-clock training time (makes output nondeterministic).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out_csv: PathBuf,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct DensifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: PathBuf,
}

fn load_dataset(args: &InputArgs) -> anyhow::Result<InteractionDataset> {
    let path = &args.input;
    let format = match args.format {
        InputFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => InputFormat::Cache,
            Some("dat") => InputFormat::Movielens,
            Some("csv") => InputFormat::Csv,
            _ => bail!(dotmat::Error::Config(format!(
                "cannot infer the format of {}; pass --format",
                path.display()
            ))),
        },
        f => f,
    };
    let read = |outcome: dotmat::Result<ParseOutcome>| -> anyhow::Result<InteractionDataset> {
        let outcome = outcome.with_context(|| format!("reading {}", path.display()))?;
        if outcome.duplicates > 0 {
            warn!("{}: {} duplicate rows dropped", path.display(), outcome.duplicates);
        }
        Ok(outcome.dataset)
    };
    let dataset = match format {
        InputFormat::Movielens => read(parse_movielens_path(path))?,
        InputFormat::Csv => {
            let spec = ColumnSpec {
                user: args.user_col.clone(),
                item: args.item_col.clone(),
                rating: args.rating_col.clone(),
                timestamp: args.timestamp_col.clone(),
            };
            read(parse_csv_path(path, &spec))?
        }
        InputFormat::Cache | InputFormat::Auto => {
            InteractionDataset::load_json(path).with_context(|| format!("reading {}", path.display()))?
        }
    };
    let dataset = match args.r_max {
        Some(r) => dataset.with_r_max(r)?,
        None => dataset,
    };
    info!(
        "{}: {} users, {} items, {} ratings, r_max {}",
        path.display(),
        dataset.users().len(),
        dataset.items().len(),
        dataset.len(),
        dataset.r_max()
    );
    Ok(dataset)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn ingest(args: IngestArgs) -> anyhow::Result<()> {
    let dataset = load_dataset(&args.input)?;
    dataset
        .save_json(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!(
        "{} users, {} items, {} ratings, r_max {}",
        dataset.users().len(),
        dataset.items().len(),
        dataset.len(),
        dataset.r_max()
    );
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let dataset = load_dataset(&args.input)?;
    let config = TrainConfig {
        learning_rate: args.lr,
        epochs: args.epochs,
        dim: args.dim,
        clamp_eps: args.clamp_eps,
        seed: args.seed,
        pairs_per_user: args.pairs_per_user,
    };
    config.validate()?;
    let split = if args.test_fraction > 0.0 {
        split_train_test(&dataset, args.test_fraction, args.seed)?
    } else {
        SplitDataset::train_only(dataset)?
    };
    let r_max = split.r_max();
    let (model, trace, predictor): (_, TrainTrace, Box<dyn Predictor>) = match args.algo {
        TrainAlgo::Dotmat => {
            let (m, t) = train_dotmat(split.users(), split.items(), &config)?;
            (m.clone(), t, Box::new(DotPredictor::new(m, r_max)))
        }
        TrainAlgo::Mf => {
            let (m, t) = train_mf_classic(&split, &config)?;
            (m.clone(), t, Box::new(DotPredictor::new(m, r_max)))
        }
        TrainAlgo::DotmatHybrid => {
            let (m, t) = train_dotmat_hybrid(&split, &config, &config)?;
            (m.clone(), t, Box::new(DotPredictor::new(m, r_max)))
        }
        TrainAlgo::Rankmat => {
            let ranks = popularity_ranks(&split.train)?;
            let (m, t) = train_rankmat(&split, &ranks, &config)?;
            (m.clone(), t, Box::new(RankMatPredictor::new(m, ranks, r_max)))
        }
        TrainAlgo::Glovemat => {
            let (m, t) = train_glovemat(&split, &config)?;
            (m.clone(), t, Box::new(GloveMatPredictor { model: m, r_max }))
        }
    };
    save_model_to_path(&model, &args.model_out).with_context(|| format!("writing {}", args.model_out.display()))?;
    if let Some(path) = &args.trace_out {
        trace.write_csv(create(path)?)?;
    }
    if let Some(loss) = trace.last_loss() {
        println!("final epoch mean loss {loss}");
    }
    if !split.test.is_empty() {
        let preds = predict_all(&predictor, &split.test)?;
        println!("test MAE {}", mae(&preds)?);
    }
    Ok(())
}

fn predict(args: PredictArgs) -> anyhow::Result<()> {
    let model = load_model_from_path(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let dataset = load_dataset(&args.input)?;
    let r_max = dataset.r_max();
    let predictor: Box<dyn Predictor> = match args.rule {
        PredictRule::Dot => Box::new(DotPredictor::new(model, r_max)),
        PredictRule::Glovemat => Box::new(GloveMatPredictor { model, r_max }),
        PredictRule::Rankmat => {
            let Some(path) = &args.rank_data else {
                bail!(dotmat::Error::Config("--rule rankmat needs --rank-data".into()));
            };
            let rank_args = InputArgs {
                input: path.clone(),
                format: InputFormat::Auto,
                r_max: None,
                ..args.input.clone()
            };
            let ranks = popularity_ranks(&load_dataset(&rank_args)?)?;
            Box::new(RankMatPredictor::new(model, ranks, r_max))
        }
    };
    let preds = predict_all(&predictor, &dataset)?;
    let mut w = csv::Writer::from_writer(create(&args.output)?);
    w.write_record(["user_id", "item_id", "predicted", "actual"])?;
    for p in &preds {
        w.write_record([
            p.user.to_string(),
            p.item.to_string(),
            p.predicted.to_string(),
            p.actual.to_string(),
        ])?;
    }
    w.flush()?;
    if !preds.is_empty() {
        println!("MAE {}", mae(&preds)?);
    }
    Ok(())
}

fn grid(args: GridArgs) -> anyhow::Result<()> {
    let dataset = load_dataset(&args.input)?;
    let algorithms = args
        .algos
        .iter()
        .map(|a| a.parse::<Algorithm>())
        .collect::<dotmat::Result<Vec<_>>>()?;
    let spec = GridSpec {
        algorithms,
        learning_rates: args.lrs.unwrap_or_else(|| DEFAULT_LEARNING_RATES.to_vec()),
        sample_sizes: args.samples,
        dim: args.dim,
        epochs: args.epochs,
        test_fraction: args.test_fraction,
        top_k: args.top_k,
        pairs_per_user: args.pairs_per_user,
        clamp_eps: dotmat::DEFAULT_CLAMP_EPS,
        seed: args.seed,
        record_timings: args.timings,
    };
    let report = dotmat::run_grid(&dataset, &spec)?;
    let mut out = create(&args.out_csv)?;
    report.emit_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.out_json {
        let mut out = create(path)?;
        report.emit_json(&mut out)?;
        out.flush()?;
    }
    println!("{} rows written to {}", report.rows.len(), args.out_csv.display());
    Ok(())
}

fn densify_cmd(args: DensifyArgs) -> anyhow::Result<()> {
    let model = load_model_from_path(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let dataset = load_dataset(&args.input)?;
    let dense = densify(&model, &dataset, dataset.users(), dataset.items())?;
    dense
        .save_json(&args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!(
        "{} observed + {} synthetic ratings",
        dataset.len(),
        dense.len() - dataset.len()
    );
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<dotmat::Error>() {
            if e.is_usage_error() {
                return EXIT_USAGE;
            }
            if e.is_data_error() || matches!(e, dotmat::Error::Io(_)) {
                return EXIT_DATA;
            }
            return EXIT_INTERNAL;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<csv::Error>().is_some() {
            return EXIT_DATA;
        }
    }
    EXIT_INTERNAL
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Grid(a) => grid(a),
        Command::Densify(a) => densify_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
