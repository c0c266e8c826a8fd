//! Rating-file parsing, temporal training/probe split and cold-start
//! filtering.

use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, GraphError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no rating records")]
    NoRecords,
    #[error("cutoff {cutoff} leaves the training set empty")]
    EmptyTraining { cutoff: i64 },
    #[error("probe ratio must be a finite non-negative number, got {0}")]
    InvalidRatio(f64),
    #[error("unknown delimiter {0:?} (expected ws, csv or coloncolon)")]
    UnknownDelimiter(String),
    #[error("invalid cutoff {0:?} (expected epoch seconds or a percentage like 90%)")]
    InvalidCutoff(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Whitespace,
    Comma,
    DoubleColon,
}

impl FromStr for Delimiter {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ws" | "whitespace" => Ok(Delimiter::Whitespace),
            "csv" | "comma" => Ok(Delimiter::Comma),
            "coloncolon" | "::" => Ok(Delimiter::DoubleColon),
            other => Err(IngestError::UnknownDelimiter(other.to_string())),
        }
    }
}

impl Delimiter {
    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Whitespace => line.split_whitespace().collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::DoubleColon => line.split("::").map(str::trim).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FormatConfig {
    pub delimiter: Delimiter,
    /// Skip malformed lines instead of failing on the first one.
    pub lenient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingRecord {
    pub user: String,
    pub item: String,
    pub rating: Option<f64>,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedRatings {
    pub records: Vec<RatingRecord>,
    /// Malformed lines dropped in lenient mode.
    pub skipped: usize,
}

/// Parses one record per non-blank line: `user item [rating] timestamp`.
pub fn parse_ratings<R: BufRead>(source: R, format: FormatConfig) -> Result<ParsedRatings, IngestError> {
    let mut out = ParsedRatings::default();
    for (idx, line) in source.lines().enumerate() {
        let line = match line {
            Ok(line) => line,
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData && format.lenient => {
                out.skipped += 1;
                continue;
            }
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                return Err(IngestError::Malformed {
                    line: idx + 1,
                    reason: "invalid UTF-8".into(),
                })
            }
            Err(e) => return Err(e.into()),
        };
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, format.delimiter) {
            Ok(record) => out.records.push(record),
            Err(_) if format.lenient => out.skipped += 1,
            Err(reason) => return Err(IngestError::Malformed { line: idx + 1, reason }),
        }
    }
    Ok(out)
}

fn parse_line(line: &str, delimiter: Delimiter) -> Result<RatingRecord, String> {
    let fields = delimiter.split(line.trim());
    let (user, item, rating, ts) = match fields.as_slice() {
        [u, i, t] => (*u, *i, None, *t),
        [u, i, r, t] => (*u, *i, Some(*r), *t),
        other => return Err(format!("expected 3 or 4 fields, found {}", other.len())),
    };
    if user.is_empty() || item.is_empty() {
        return Err("empty user or item id".into());
    }
    let rating = rating
        .map(|r| {
            r.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid rating {r:?}"))
        })
        .transpose()?;
    let timestamp = ts
        .parse::<i64>()
        .ok()
        .filter(|t| *t >= 0)
        .ok_or_else(|| format!("invalid timestamp {ts:?}"))?;
    Ok(RatingRecord {
        user: user.to_string(),
        item: item.to_string(),
        rating,
        timestamp,
    })
}

/// Either an absolute epoch cutoff or the timestamp below which the given
/// fraction of records falls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Epoch(i64),
    Fraction(f64),
}

impl FromStr for Cutoff {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(pct) = s.strip_suffix('%') {
            return pct
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|p| (0.0..=100.0).contains(p))
                .map(|p| Cutoff::Fraction(p / 100.0))
                .ok_or_else(|| IngestError::InvalidCutoff(s.to_string()));
        }
        s.parse::<i64>()
            .map(Cutoff::Epoch)
            .map_err(|_| IngestError::InvalidCutoff(s.to_string()))
    }
}

impl Cutoff {
    /// Resolves to an epoch timestamp. A fraction `f` picks the smallest
    /// timestamp `t` such that at least `⌈f·n⌉` records have time `≤ t`.
    pub fn resolve(&self, records: &[RatingRecord]) -> Result<i64, IngestError> {
        match *self {
            Cutoff::Epoch(t) => Ok(t),
            Cutoff::Fraction(f) => {
                if records.is_empty() {
                    return Err(IngestError::NoRecords);
                }
                let mut times: Vec<i64> = records.iter().map(|r| r.timestamp).collect();
                times.sort_unstable();
                let need = ((f * times.len() as f64).ceil() as usize).clamp(1, times.len());
                Ok(times[need - 1])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub cutoff: i64,
    /// When set, the probe set is a seeded uniform sample of the post-cutoff
    /// links of size `round(ratio · |E_T|)`; otherwise every post-cutoff link
    /// is a probe link.
    pub probe_ratio: Option<f64>,
    /// Records rated strictly below this value are discarded.
    pub rating_min: Option<f64>,
    pub seed: u64,
}

/// Dense index assignment for raw ids, in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    raw: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn get_or_insert(&mut self, raw: &str) -> usize {
        if let Some(&idx) = self.index.get(raw) {
            return idx;
        }
        let idx = self.raw.len();
        self.raw.push(raw.to_string());
        self.index.insert(raw.to_string(), idx);
        idx
    }

    pub fn index_of(&self, raw: &str) -> Option<usize> {
        self.index.get(raw).copied()
    }

    pub fn raw(&self, idx: usize) -> &str {
        &self.raw[idx]
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn truncate(&mut self, len: usize) {
        for raw in self.raw.drain(len.min(self.raw.len())..) {
            self.index.remove(&raw);
        }
    }
}

/// Held-out (user, item) pairs, sorted and unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProbeSet {
    pairs: Vec<(usize, usize)>,
}

impl ProbeSet {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        ProbeSet { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Probe items grouped per user; every group is sorted.
    pub fn by_user(&self, num_users: usize) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); num_users];
        for &(u, i) in &self.pairs {
            if u < num_users {
                groups[u].push(i);
            }
        }
        groups
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub training: BipartiteGraph,
    pub probe: ProbeSet,
    pub users: IdMap,
    pub items: IdMap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestManifest {
    pub num_users: usize,
    pub num_items: usize,
    pub training_links: usize,
    pub probe_links: usize,
    pub seed: u64,
    pub cutoff: i64,
    pub probe_ratio: Option<f64>,
    pub rating_min: Option<f64>,
}

impl Dataset {
    pub fn manifest(&self, config: &SplitConfig) -> IngestManifest {
        IngestManifest {
            num_users: self.training.num_users(),
            num_items: self.training.num_items(),
            training_links: self.training.num_links(),
            probe_links: self.probe.len(),
            seed: config.seed,
            cutoff: config.cutoff,
            probe_ratio: config.probe_ratio,
            rating_min: config.rating_min,
        }
    }
}

/// Splits records at `config.cutoff`: links with `t ≤ cutoff` form the
/// training graph, later ones are probe candidates. Repeated (user, item)
/// pairs collapse to their earliest timestamp before splitting.
///
/// Users and items seen in training get the lowest dense indices; nodes that
/// only occur in the probe set are appended after them as isolated nodes, so
/// [`filter_cold_start`] can later drop them.
pub fn temporal_split(records: &[RatingRecord], config: &SplitConfig) -> Result<Dataset, IngestError> {
    if let Some(r) = config.probe_ratio {
        if !r.is_finite() || r < 0.0 {
            return Err(IngestError::InvalidRatio(r));
        }
    }
    let kept: Vec<&RatingRecord> = records
        .iter()
        .filter(|r| match (config.rating_min, r.rating) {
            (Some(min), Some(v)) => v >= min,
            _ => true,
        })
        .collect();
    if kept.is_empty() {
        return Err(IngestError::NoRecords);
    }

    // (user, item) -> position in `pairs`; pairs keep first-appearance order.
    let mut slot: HashMap<(&str, &str), usize> = HashMap::new();
    let mut pairs: Vec<(&str, &str, i64)> = Vec::new();
    for r in &kept {
        match slot.get(&(r.user.as_str(), r.item.as_str())) {
            Some(&pos) => pairs[pos].2 = pairs[pos].2.min(r.timestamp),
            None => {
                slot.insert((r.user.as_str(), r.item.as_str()), pairs.len());
                pairs.push((r.user.as_str(), r.item.as_str(), r.timestamp));
            }
        }
    }

    let (train, post): (Vec<_>, Vec<_>) = pairs.into_iter().partition(|p| p.2 <= config.cutoff);
    if train.is_empty() {
        return Err(IngestError::EmptyTraining { cutoff: config.cutoff });
    }

    let probe_src: Vec<(&str, &str, i64)> = match config.probe_ratio {
        None => post,
        Some(ratio) => {
            let target = ((ratio * train.len() as f64).round() as usize).min(post.len());
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut picked = index::sample(&mut rng, post.len(), target).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| post[i]).collect()
        }
    };

    let mut users = IdMap::default();
    let mut items = IdMap::default();
    for &(u, i, _) in &train {
        users.get_or_insert(u);
        items.get_or_insert(i);
    }
    let probe_pairs: Vec<(usize, usize)> = probe_src
        .iter()
        .map(|&(u, i, _)| (users.get_or_insert(u), items.get_or_insert(i)))
        .collect();

    let mut training = BipartiteGraph::new(users.len(), items.len());
    for &(u, i, t) in &train {
        training.add_link(users.index_of(u).unwrap(), items.index_of(i).unwrap(), t)?;
    }
    Ok(Dataset {
        training,
        probe: ProbeSet::new(probe_pairs),
        users,
        items,
    })
}

/// Drops probe pairs whose user or item has no training link, then trims
/// the trailing isolated nodes (the probe-only ones) from the index spaces.
pub fn filter_cold_start(mut dataset: Dataset) -> Dataset {
    let g = &dataset.training;
    let warm: Vec<(usize, usize)> = dataset
        .probe
        .pairs()
        .iter()
        .copied()
        .filter(|&(u, i)| u < g.num_users() && i < g.num_items() && g.user_degree(u) > 0 && g.item_degree(i) > 0)
        .collect();
    dataset.probe = ProbeSet::new(warm);
    dataset.training.trim_isolated_tail();
    dataset.users.truncate(dataset.training.num_users());
    dataset.items.truncate(dataset.training.num_items());
    dataset
}

/// Builds a graph from records taking every record as a training link, as
/// used for plain edge lists (`stats`, backbone re-ingestion).
pub fn graph_from_records(records: &[RatingRecord]) -> Result<Dataset, IngestError> {
    if records.is_empty() {
        return Ok(Dataset {
            training: BipartiteGraph::new(0, 0),
            probe: ProbeSet::default(),
            users: IdMap::default(),
            items: IdMap::default(),
        });
    }
    let config = SplitConfig {
        cutoff: i64::MAX,
        probe_ratio: None,
        rating_min: None,
        seed: 0,
    };
    temporal_split(records, &config)
}
