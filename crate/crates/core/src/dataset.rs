use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{ItemId, UserId};

/// One observed rating event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingTriple {
    pub user: UserId,
    pub item: ItemId,
    pub rating: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<i64>,
}

impl RatingTriple {
    pub fn new(user: impl Into<UserId>, item: impl Into<ItemId>, rating: f64) -> Self {
        RatingTriple {
            user: user.into(),
            item: item.into(),
            rating,
            timestamp: None,
        }
    }
}

/// Observed ratings plus the user and item universes they live in.
///
/// Universes may be larger than the set of ids touched by triples: the two
/// halves of a train/test split keep the full universes of their source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset")]
pub struct InteractionDataset {
    users: Vec<UserId>,
    items: Vec<ItemId>,
    triples: Vec<RatingTriple>,
    r_max: f64,
}

#[derive(Deserialize)]
struct RawDataset {
    users: Vec<UserId>,
    items: Vec<ItemId>,
    triples: Vec<RatingTriple>,
    r_max: f64,
}

impl TryFrom<RawDataset> for InteractionDataset {
    type Error = Error;

    fn try_from(raw: RawDataset) -> Result<Self> {
        InteractionDataset::new(raw.users, raw.items, raw.triples, raw.r_max)
    }
}

impl InteractionDataset {
    /// Validates every invariant: ratings positive and finite, ids inside the
    /// universes, one triple per pair, `r_max` at least the largest rating.
    /// Universes are sorted and deduplicated.
    pub fn new(
        users: impl IntoIterator<Item = UserId>,
        items: impl IntoIterator<Item = ItemId>,
        triples: Vec<RatingTriple>,
        r_max: f64,
    ) -> Result<Self> {
        let users: Vec<UserId> = users.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let items: Vec<ItemId> = items.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if !(r_max.is_finite() && r_max >= 0.0) {
            return Err(Error::Integrity(format!("invalid r_max {r_max}")));
        }
        let mut seen = HashSet::with_capacity(triples.len());
        for t in &triples {
            if !(t.rating.is_finite() && t.rating > 0.0) {
                return Err(Error::Integrity(format!(
                    "rating {} for ({}, {}) is not positive",
                    t.rating, t.user, t.item
                )));
            }
            if t.rating > r_max {
                return Err(Error::Integrity(format!(
                    "rating {} for ({}, {}) exceeds r_max {r_max}",
                    t.rating, t.user, t.item
                )));
            }
            if users.binary_search(&t.user).is_err() {
                return Err(Error::Lookup {
                    kind: "user",
                    id: t.user.0,
                });
            }
            if items.binary_search(&t.item).is_err() {
                return Err(Error::Lookup {
                    kind: "item",
                    id: t.item.0,
                });
            }
            if !seen.insert((t.user, t.item)) {
                return Err(Error::Integrity(format!(
                    "duplicate rating for ({}, {})",
                    t.user, t.item
                )));
            }
        }
        Ok(InteractionDataset {
            users,
            items,
            triples,
            r_max,
        })
    }

    /// Universes are the ids seen in `triples`; `r_max` defaults to the
    /// largest observed rating (0 for an empty dataset).
    pub fn from_triples(triples: Vec<RatingTriple>, r_max: Option<f64>) -> Result<Self> {
        let users: Vec<UserId> = triples.iter().map(|t| t.user).collect();
        let items: Vec<ItemId> = triples.iter().map(|t| t.item).collect();
        let r_max = r_max.unwrap_or_else(|| triples.iter().map(|t| t.rating).fold(0.0, f64::max));
        InteractionDataset::new(users, items, triples, r_max)
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn triples(&self) -> &[RatingTriple] {
        &self.triples
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Replaces the rating ceiling; fails if it would drop below an observed rating.
    pub fn with_r_max(self, r_max: f64) -> Result<Self> {
        InteractionDataset::new(self.users, self.items, self.triples, r_max)
    }

    pub fn pairs(&self) -> HashSet<(UserId, ItemId)> {
        self.triples.iter().map(|t| (t.user, t.item)).collect()
    }

    pub fn user_counts(&self) -> HashMap<UserId, usize> {
        let mut counts = HashMap::new();
        for t in &self.triples {
            *counts.entry(t.user).or_insert(0) += 1;
        }
        counts
    }

    pub fn item_counts(&self) -> HashMap<ItemId, usize> {
        let mut counts = HashMap::new();
        for t in &self.triples {
            *counts.entry(t.item).or_insert(0) += 1;
        }
        counts
    }

    /// Stable FNV-1a digest of universes, triples and `r_max`, used to
    /// assert that two runs saw the same data.
    pub fn digest(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.r_max.to_bits());
        feed(self.users.len() as u64);
        self.users.iter().for_each(|u| feed(u.0));
        feed(self.items.len() as u64);
        self.items.iter().for_each(|i| feed(i.0));
        feed(self.triples.len() as u64);
        for t in &self.triples {
            feed(t.user.0);
            feed(t.item.0);
            feed(t.rating.to_bits());
            feed(t.timestamp.map_or(u64::MAX, |ts| ts as u64));
        }
        h
    }

    pub fn to_json_writer<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn from_json_reader<R: Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.to_json_writer(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_reader(BufReader::new(File::open(path)?))
    }
}

/// Keeps the last occurrence of every `(user, item)` pair, preserving the
/// position of that last occurrence. Returns the survivors and the number
/// of rows dropped.
pub fn dedup_keep_last(triples: Vec<RatingTriple>) -> (Vec<RatingTriple>, usize) {
    let mut last: HashMap<(UserId, ItemId), usize> = HashMap::with_capacity(triples.len());
    for (i, t) in triples.iter().enumerate() {
        last.insert((t.user, t.item), i);
    }
    let dropped = triples.len() - last.len();
    if dropped == 0 {
        return (triples, 0);
    }
    let kept = triples
        .into_iter()
        .enumerate()
        .filter(|(i, t)| last[&(t.user, t.item)] == *i)
        .map(|(_, t)| t)
        .collect();
    (kept, dropped)
}
