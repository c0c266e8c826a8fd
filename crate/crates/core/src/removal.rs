//! Link removal strategies and the macro-step removal schedule.
//!
//! Every strategy ranks the links of the *current* graph at the start of a
//! macro-step and removes that step's batch from the top of the ranking.
//! Scores are frozen for the duration of a batch. Ties always fall to the
//! lower [`LinkId`].

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, LinkId};
use crate::ingest::ProbeSet;
use crate::metrics::{evaluate_against, EvalConfig, MetricError, MetricReport};
use crate::structure::{structure_report, StructureReport};

pub const DEFAULT_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RemovalError {
    #[error("{0} selects links per user and has no global ranking")]
    NotGlobal(Algorithm),
    #[error("hybrid parameter must lie in [0, 1], got {0}")]
    InvalidLambda(f64),
    #[error("unknown removal algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("number of macro-steps must be at least 1")]
    ZeroSteps,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// System oldest removal.
    Sor,
    /// System newest removal.
    Snr,
    /// Individual oldest removal.
    Ior,
    /// Individual newest removal.
    Inr,
    /// Most popular (largest `k_i k_α`) removal.
    Mpr,
    /// Least popular removal.
    Lpr,
    /// Most rectangles removal.
    Mrr,
    /// Fewest rectangles removal.
    Frr,
    /// Random removal.
    Rr,
    /// Per pick: MPR with probability λ, SOR otherwise.
    Hybrid(f64),
}

impl Algorithm {
    pub const BASIC: [Algorithm; 9] = [
        Algorithm::Sor,
        Algorithm::Snr,
        Algorithm::Ior,
        Algorithm::Inr,
        Algorithm::Mpr,
        Algorithm::Lpr,
        Algorithm::Mrr,
        Algorithm::Frr,
        Algorithm::Rr,
    ];

    pub fn hybrid(lambda: f64) -> Result<Self, RemovalError> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Algorithm::Hybrid(lambda))
        } else {
            Err(RemovalError::InvalidLambda(lambda))
        }
    }

    /// A file-name-safe label, e.g. `SOR` or `HYBRID-0.6`.
    pub fn slug(&self) -> String {
        self.to_string().replace(':', "-")
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Sor => "SOR",
            Algorithm::Snr => "SNR",
            Algorithm::Ior => "IOR",
            Algorithm::Inr => "INR",
            Algorithm::Mpr => "MPR",
            Algorithm::Lpr => "LPR",
            Algorithm::Mrr => "MRR",
            Algorithm::Frr => "FRR",
            Algorithm::Rr => "RR",
            Algorithm::Hybrid(lambda) => return write!(f, "HYBRID:{lambda}"),
        };
        f.write_str(name)
    }
}

impl FromStr for Algorithm {
    type Err = RemovalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        if let Some(rest) = upper.strip_prefix("HYBRID") {
            let lambda = rest
                .strip_prefix(':')
                .or_else(|| rest.strip_prefix('-'))
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| RemovalError::UnknownAlgorithm(s.to_string()))?;
            return Algorithm::hybrid(lambda);
        }
        Algorithm::BASIC
            .into_iter()
            .find(|a| a.to_string() == upper)
            .ok_or_else(|| RemovalError::UnknownAlgorithm(s.to_string()))
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Cumulative removal targets `c_n = ⌈E·n / steps⌉`, `c_0 = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub total: usize,
    pub cumulative: Vec<usize>,
}

impl Schedule {
    pub fn new(total: usize, steps: usize) -> Self {
        let cumulative = (0..=steps).map(|n| (total * n).div_ceil(steps.max(1))).collect();
        Schedule { total, cumulative }
    }

    pub fn steps(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// Links removed during macro-step `n` (1-based).
    pub fn batch(&self, n: usize) -> usize {
        self.cumulative[n] - self.cumulative[n - 1]
    }

    /// Cumulative links removed after macro-step `n`.
    pub fn removed_after(&self, n: usize) -> usize {
        self.cumulative[n]
    }
}

/// Removal priority of each live link for a global strategy; smaller keys
/// are removed first. Keys are paired with link ids for tie-breaking.
fn priority_keys(g: &BipartiteGraph, algorithm: Algorithm) -> Option<Vec<(i128, LinkId)>> {
    let popularity = |user: usize, item: usize| (g.user_degree(user) * g.item_degree(item)) as i128;
    let keys = match algorithm {
        Algorithm::Sor => g.links().map(|l| (l.timestamp as i128, l.id)).collect(),
        Algorithm::Snr => g.links().map(|l| (-(l.timestamp as i128), l.id)).collect(),
        Algorithm::Mpr => g.links().map(|l| (-popularity(l.user, l.item), l.id)).collect(),
        Algorithm::Lpr => g.links().map(|l| (popularity(l.user, l.item), l.id)).collect(),
        Algorithm::Mrr | Algorithm::Frr => {
            let rects = g.rectangle_counts();
            let sign = if algorithm == Algorithm::Mrr { -1 } else { 1 };
            g.links()
                .map(|l| (sign * rects[l.id.0 as usize] as i128, l.id))
                .collect()
        }
        _ => return None,
    };
    Some(keys)
}

/// The first `count` links of the priority order, in order.
fn top_keys(mut keys: Vec<(i128, LinkId)>, count: usize) -> Vec<LinkId> {
    if count == 0 {
        return Vec::new();
    }
    if keys.len() > count {
        keys.select_nth_unstable(count - 1);
        keys.truncate(count);
    }
    keys.sort_unstable();
    keys.into_iter().map(|(_, id)| id).collect()
}

/// Full removal order of the live links for a global strategy.
pub fn rank_links<R: Rng>(g: &BipartiteGraph, algorithm: Algorithm, rng: &mut R) -> Result<Vec<LinkId>, RemovalError> {
    match algorithm {
        Algorithm::Rr => {
            let mut ids: Vec<LinkId> = g.links().map(|l| l.id).collect();
            ids.shuffle(rng);
            Ok(ids)
        }
        Algorithm::Ior | Algorithm::Inr | Algorithm::Hybrid(_) => Err(RemovalError::NotGlobal(algorithm)),
        _ => {
            let keys = priority_keys(g, algorithm).expect("global strategy");
            let n = keys.len();
            Ok(top_keys(keys, n))
        }
    }
}

/// Splits `batch` removals across users in proportion to their current
/// degree (largest remainder, ties to the lower user index), then takes the
/// oldest (IOR) or newest (INR) links of each user.
pub fn select_per_user(g: &BipartiteGraph, algorithm: Algorithm, batch: usize) -> Result<Vec<LinkId>, RemovalError> {
    let newest_first = match algorithm {
        Algorithm::Ior => false,
        Algorithm::Inr => true,
        other => return Err(RemovalError::NotGlobal(other)),
    };
    let live = g.num_links();
    let batch = batch.min(live);
    if batch == 0 {
        return Ok(Vec::new());
    }
    let degrees: Vec<usize> = (0..g.num_users()).map(|u| g.user_degree(u)).collect();
    let mut quota: Vec<usize> = degrees.iter().map(|&k| batch * k / live).collect();
    let mut remainders: Vec<(usize, usize)> = degrees
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(u, &k)| (batch * k % live, u))
        .collect();
    remainders.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = batch - quota.iter().sum::<usize>();
    while left > 0 {
        let before = left;
        for &(_, u) in &remainders {
            if left == 0 {
                break;
            }
            if quota[u] < degrees[u] {
                quota[u] += 1;
                left -= 1;
            }
        }
        debug_assert!(left < before, "quota redistribution stalled");
    }

    let mut picked = Vec::with_capacity(batch);
    for (u, &q) in quota.iter().enumerate() {
        if q == 0 {
            continue;
        }
        let mut links: Vec<(i64, LinkId)> = g
            .user_neighbors(u)
            .iter()
            .map(|n| {
                let t = g.link(n.link).expect("adjacency refers to live link").timestamp;
                (if newest_first { -t } else { t }, n.link)
            })
            .collect();
        links.sort_unstable();
        picked.extend(links.into_iter().take(q).map(|(_, id)| id));
    }
    Ok(picked)
}

/// Draws `batch` links: for each pick a uniform `r ∈ (0, 1]` selects the
/// next unchosen link in SOR order when `r > λ`, otherwise in MPR order.
pub fn hybrid_select<R: Rng>(
    g: &BipartiteGraph,
    lambda: f64,
    batch: usize,
    rng: &mut R,
) -> Result<Vec<LinkId>, RemovalError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(RemovalError::InvalidLambda(lambda));
    }
    let batch = batch.min(g.num_links());
    let oldest = top_keys(priority_keys(g, Algorithm::Sor).expect("global"), batch);
    let popular = top_keys(priority_keys(g, Algorithm::Mpr).expect("global"), batch);
    let mut chosen = vec![false; g.link_id_bound()];
    let (mut a, mut b) = (0, 0);
    let mut picked = Vec::with_capacity(batch);
    while picked.len() < batch {
        let r: f64 = 1.0 - rng.gen::<f64>();
        let (order, cursor) = if r > lambda {
            (&oldest, &mut a)
        } else {
            (&popular, &mut b)
        };
        while chosen[order[*cursor].0 as usize] {
            *cursor += 1;
        }
        let id = order[*cursor];
        chosen[id.0 as usize] = true;
        picked.push(id);
    }
    Ok(picked)
}

/// The links a strategy removes from `g` in one batch.
pub fn select_batch<R: Rng>(
    g: &BipartiteGraph,
    algorithm: Algorithm,
    batch: usize,
    rng: &mut R,
) -> Result<Vec<LinkId>, RemovalError> {
    match algorithm {
        Algorithm::Ior | Algorithm::Inr => select_per_user(g, algorithm, batch),
        Algorithm::Hybrid(lambda) => hybrid_select(g, lambda, batch, rng),
        Algorithm::Rr => {
            let mut order = rank_links(g, algorithm, rng)?;
            order.truncate(batch);
            Ok(order)
        }
        _ => Ok(top_keys(priority_keys(g, algorithm).expect("global"), batch)),
    }
}

/// Step-by-step removal of all links of a graph.
#[derive(Debug, Clone)]
pub struct RemovalRun {
    graph: BipartiteGraph,
    algorithm: Algorithm,
    schedule: Schedule,
    step: usize,
    rng: ChaCha8Rng,
}

impl RemovalRun {
    pub fn new(graph: BipartiteGraph, algorithm: Algorithm, seed: u64, steps: usize) -> Result<Self, RemovalError> {
        Self::with_rng(graph, algorithm, ChaCha8Rng::seed_from_u64(seed), steps)
    }

    pub fn with_rng(
        graph: BipartiteGraph,
        algorithm: Algorithm,
        rng: ChaCha8Rng,
        steps: usize,
    ) -> Result<Self, RemovalError> {
        if steps == 0 {
            return Err(RemovalError::ZeroSteps);
        }
        if let Algorithm::Hybrid(lambda) = algorithm {
            Algorithm::hybrid(lambda)?;
        }
        let schedule = Schedule::new(graph.num_links(), steps);
        Ok(RemovalRun {
            graph,
            algorithm,
            schedule,
            step: 0,
            rng,
        })
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn into_graph(self) -> BipartiteGraph {
        self.graph
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Macro-steps completed so far.
    pub fn current_step(&self) -> usize {
        self.step
    }

    /// Performs the next macro-step and returns the removed link ids, or
    /// `None` once the schedule is exhausted.
    pub fn advance(&mut self) -> Option<Vec<LinkId>> {
        if self.step >= self.schedule.steps() {
            return None;
        }
        self.step += 1;
        let batch = self.schedule.batch(self.step);
        let removed = select_batch(&self.graph, self.algorithm, batch, &mut self.rng)
            .expect("algorithm validated at construction");
        for &id in &removed {
            self.graph.remove_link(id).expect("selected links are live");
        }
        Some(removed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub steps: usize,
    pub eval: EvalConfig,
    /// Also compute structure indices after every step.
    pub structure: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            steps: DEFAULT_STEPS,
            eval: EvalConfig::default(),
            structure: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    #[serde(skip)]
    pub removed: Vec<LinkId>,
    pub links_remaining: usize,
    pub metrics: MetricReport,
    pub structure: Option<StructureReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemovalTrace {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub schedule: Schedule,
    /// State before any removal (step 0).
    pub initial: StepRecord,
    /// One record per macro-step, 1..=steps.
    pub steps: Vec<StepRecord>,
}

impl RemovalTrace {
    pub fn removed_ids(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.steps.iter().flat_map(|s| s.removed.iter().copied())
    }
}

fn record(
    g: &BipartiteGraph,
    collected: &BipartiteGraph,
    probe: &ProbeSet,
    config: &RunConfig,
    step: usize,
    removed: Vec<LinkId>,
) -> Result<StepRecord, RemovalError> {
    let mut metrics = evaluate_against(g, collected, probe, &config.eval)?;
    metrics.macro_step = step;
    Ok(StepRecord {
        step,
        removed,
        links_remaining: g.num_links(),
        metrics,
        structure: config.structure.then(|| structure_report(g)),
    })
}

/// Removes every link of `g0` over `config.steps` macro-steps, evaluating
/// against the fixed probe set after each one.
pub fn run(
    g0: &BipartiteGraph,
    algorithm: Algorithm,
    probe: &ProbeSet,
    seed: u64,
    config: &RunConfig,
) -> Result<RemovalTrace, RemovalError> {
    let mut removal = RemovalRun::new(g0.clone(), algorithm, seed, config.steps)?;
    let initial = record(removal.graph(), g0, probe, config, 0, Vec::new())?;
    let mut steps = Vec::with_capacity(config.steps);
    while let Some(removed) = removal.advance() {
        steps.push(record(
            removal.graph(),
            g0,
            probe,
            config,
            removal.current_step(),
            removed,
        )?);
    }
    Ok(RemovalTrace {
        algorithm,
        seed,
        schedule: removal.schedule().clone(),
        initial,
        steps,
    })
}
