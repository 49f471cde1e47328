//! Rating file parsers, user sampling, train/test splitting and popularity
//! ranks.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{dedup_keep_last, InteractionDataset, RatingTriple};
use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

/// A parsed dataset together with the number of duplicate `(user, item)`
/// rows that were dropped (last occurrence wins).
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub dataset: InteractionDataset,
    pub duplicates: usize,
}

fn finish(triples: Vec<RatingTriple>) -> Result<ParseOutcome> {
    let (triples, duplicates) = dedup_keep_last(triples);
    if duplicates > 0 {
        warn!("dropped {duplicates} duplicate (user, item) rows, keeping the last occurrence");
    }
    Ok(ParseOutcome {
        dataset: InteractionDataset::from_triples(triples, None)?,
        duplicates,
    })
}

fn parse_rating(field: &str, line: usize) -> Result<f64> {
    let rating: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("rating `{field}` is not a number")))?;
    if !(rating.is_finite() && rating > 0.0) {
        return Err(Error::parse(line, format!("rating {rating} is not positive")));
    }
    Ok(rating)
}

fn parse_id(field: &str, what: &str, line: usize) -> Result<u64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} `{field}` is not an unsigned integer")))
}

/// Parses `UserID::MovieID::Rating::Timestamp` lines.
pub fn parse_movielens<R: BufRead>(input: R) -> Result<ParseOutcome> {
    let mut triples = Vec::new();
    for (n, line) in input.split(b'\n').enumerate() {
        let lineno = n + 1;
        let line = line?;
        let line = std::str::from_utf8(&line)
            .map_err(|_| Error::parse(lineno, "line is not valid UTF-8"))?
            .trim_end_matches('\r');
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected 4 `::`-separated fields, found {}", fields.len()),
            ));
        }
        let timestamp = fields[3]
            .trim()
            .parse::<i64>()
            .map_err(|_| Error::parse(lineno, format!("timestamp `{}` is not an integer", fields[3])))?;
        triples.push(RatingTriple {
            user: UserId(parse_id(fields[0], "user id", lineno)?),
            item: ItemId(parse_id(fields[1], "item id", lineno)?),
            rating: parse_rating(fields[2], lineno)?,
            timestamp: Some(timestamp),
        });
    }
    finish(triples)
}

pub fn parse_movielens_path(path: impl AsRef<Path>) -> Result<ParseOutcome> {
    parse_movielens(BufReader::new(File::open(path)?))
}

/// Column names to read from a CSV file with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub user: String,
    pub item: String,
    pub rating: String,
    pub timestamp: Option<String>,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        ColumnSpec {
            user: "user_id".into(),
            item: "item_id".into(),
            rating: "rating".into(),
            timestamp: None,
        }
    }
}

/// Parses a headed CSV file. Columns not named in `spec` are ignored.
/// Error line numbers count the header as line 1.
pub fn parse_csv<R: Read>(input: R, spec: &ColumnSpec) -> Result<ParseOutcome> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in header")))
    };
    let user_col = column(&spec.user)?;
    let item_col = column(&spec.item)?;
    let rating_col = column(&spec.rating)?;
    let ts_col = spec.timestamp.as_deref().map(column).transpose()?;

    let mut triples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let cell = |idx: usize| {
            record
                .get(idx)
                .ok_or_else(|| Error::parse(line, format!("row has no column {}", idx + 1)))
        };
        let timestamp = match ts_col {
            Some(c) => Some(
                cell(c)?
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| Error::parse(line, "timestamp is not an integer"))?,
            ),
            None => None,
        };
        triples.push(RatingTriple {
            user: UserId(parse_id(cell(user_col)?, "user id", line)?),
            item: ItemId(parse_id(cell(item_col)?, "item id", line)?),
            rating: parse_rating(cell(rating_col)?, line)?,
            timestamp,
        });
    }
    finish(triples)
}

pub fn parse_csv_path(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<ParseOutcome> {
    parse_csv(BufReader::new(File::open(path)?), spec)
}

/// Uniformly samples `n` users without replacement and keeps all of their
/// triples. The item universe shrinks to the items those users rated.
pub fn sample_users(dataset: &InteractionDataset, n: usize, seed: u64) -> Result<InteractionDataset> {
    let total = dataset.users().len();
    if n == 0 || n > total {
        return Err(Error::Bounds(format!(
            "cannot sample {n} users from a dataset with {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, total, n).into_vec();
    picked.sort_unstable();
    let users: Vec<UserId> = picked.iter().map(|&i| dataset.users()[i]).collect();
    let triples: Vec<RatingTriple> = dataset
        .triples()
        .iter()
        .filter(|t| users.binary_search(&t.user).is_ok())
        .copied()
        .collect();
    let items: Vec<ItemId> = triples.iter().map(|t| t.item).collect();
    InteractionDataset::new(users, items, triples, dataset.r_max())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: InteractionDataset,
    pub test: InteractionDataset,
}

impl SplitDataset {
    /// Wraps a dataset as an all-train split over its own universes.
    pub fn train_only(dataset: InteractionDataset) -> Result<Self> {
        let test = InteractionDataset::new(
            dataset.users().iter().copied(),
            dataset.items().iter().copied(),
            Vec::new(),
            dataset.r_max(),
        )?;
        Ok(SplitDataset { train: dataset, test })
    }

    pub fn users(&self) -> &[UserId] {
        self.train.users()
    }

    pub fn items(&self) -> &[ItemId] {
        self.train.items()
    }

    pub fn r_max(&self) -> f64 {
        self.train.r_max()
    }

    pub fn digest(&self) -> u64 {
        self.train.digest().rotate_left(1) ^ self.test.digest()
    }
}

/// Per-user stratified split. Each user sends `ceil(fraction * count)`
/// triples to test, capped so at least one stays in train. Both halves keep
/// the source universes and `r_max`; triples keep their source order.
pub fn split_train_test(dataset: &InteractionDataset, test_fraction: f64, seed: u64) -> Result<SplitDataset> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_user: BTreeMap<UserId, Vec<usize>> = BTreeMap::new();
    for (i, t) in dataset.triples().iter().enumerate() {
        by_user.entry(t.user).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; dataset.len()];
    for rows in by_user.values_mut() {
        rows.sort_by_key(|&i| dataset.triples()[i].item);
        rows.shuffle(&mut rng);
        let count = rows.len();
        // Guard against 0.1 * 30 = 3.0000000000000004 style round-up.
        let wanted = (test_fraction * count as f64 - 1e-9).ceil() as usize;
        let n_test = wanted.min(count - 1);
        for &i in &rows[..n_test] {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<_>, Vec<_>) = dataset.triples().iter().zip(&in_test).partition(|(_, &t)| t);
    let rebuild = |rows: Vec<(&RatingTriple, &bool)>| {
        InteractionDataset::new(
            dataset.users().iter().copied(),
            dataset.items().iter().copied(),
            rows.into_iter().map(|(t, _)| *t).collect(),
            dataset.r_max(),
        )
    };
    Ok(SplitDataset {
        train: rebuild(train)?,
        test: rebuild(test)?,
    })
}

/// Dense 1..N popularity ranks by descending rating count, ties by
/// ascending id. Every id in the dataset's universes is ranked, including
/// ids with no ratings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopularityRanks {
    user_rank: HashMap<UserId, u32>,
    item_rank: HashMap<ItemId, u32>,
}

impl PopularityRanks {
    pub fn user_rank(&self, id: UserId) -> Result<u32> {
        self.user_rank
            .get(&id)
            .copied()
            .ok_or(Error::Lookup { kind: "user", id: id.0 })
    }

    pub fn item_rank(&self, id: ItemId) -> Result<u32> {
        self.item_rank
            .get(&id)
            .copied()
            .ok_or(Error::Lookup { kind: "item", id: id.0 })
    }

    pub fn user_ranks(&self) -> &HashMap<UserId, u32> {
        &self.user_rank
    }

    pub fn item_ranks(&self) -> &HashMap<ItemId, u32> {
        &self.item_rank
    }
}

fn rank_by_count<T: Copy + Ord + std::hash::Hash>(universe: &[T], counts: &HashMap<T, usize>) -> HashMap<T, u32> {
    let mut order: Vec<(usize, T)> = universe
        .iter()
        .map(|&id| (counts.get(&id).copied().unwrap_or(0), id))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    order
        .into_iter()
        .enumerate()
        .map(|(r, (_, id))| (id, r as u32 + 1))
        .collect()
}

pub fn popularity_ranks(dataset: &InteractionDataset) -> Result<PopularityRanks> {
    if dataset.is_empty() {
        return Err(Error::config("popularity ranks need at least one rating"));
    }
    Ok(PopularityRanks {
        user_rank: rank_by_count(dataset.users(), &dataset.user_counts()),
        item_rank: rank_by_count(dataset.items(), &dataset.item_counts()),
    })
}
