//! Accuracy (AUC), precision@L and inter-user Hamming diversity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::BipartiteGraph;
use crate::ingest::ProbeSet;
use crate::recommend::{score_user, top_l_scored, RecommendationList, ScoreVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("probe set is empty")]
    EmptyProbe,
    #[error("no candidate negative items")]
    NoNegatives,
    #[error("no evaluated user has candidate negative items")]
    NoComparableUsers,
    #[error("recommendation length L must be at least 1")]
    ZeroLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    /// Recommendation list length.
    pub l: usize,
    /// Above this many user pairs H(L) is estimated from this many sampled
    /// pairs instead of the full double loop.
    pub hamming_pair_cap: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            l: 20,
            hamming_pair_cap: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub auc: f64,
    pub precision: f64,
    /// Absent when fewer than two users have a non-empty list.
    pub hamming: Option<f64>,
    pub l: usize,
    /// Users with a non-empty probe set.
    pub users_evaluated: usize,
    /// Evaluated users left out of the AUC average for lack of negatives.
    pub users_without_negatives: usize,
    /// Evaluated users whose recommendation list is shorter than L.
    pub short_lists: usize,
    pub hamming_pairs: usize,
    pub hamming_sampled: bool,
    pub macro_step: usize,
}

/// Exact tie-aware AUC: over all (probe, negative) pairs, wins count 1 and
/// ties 0.5. Negatives are items neither collected nor in the probe set.
pub fn auc_user(scores: &ScoreVector, probe_items: &[usize]) -> Result<f64, MetricError> {
    if probe_items.is_empty() {
        return Err(MetricError::EmptyProbe);
    }
    let mut in_probe = vec![false; scores.scores.len()];
    for &p in probe_items {
        in_probe[p] = true;
    }
    let mut negatives: Vec<f64> = (0..scores.scores.len())
        .filter(|&a| scores.is_candidate(a) && !in_probe[a])
        .map(|a| scores.scores[a])
        .collect();
    if negatives.is_empty() {
        return Err(MetricError::NoNegatives);
    }
    negatives.sort_unstable_by(f64::total_cmp);
    let mut credit = 0.0;
    let mut positives = 0usize;
    for &p in probe_items {
        if !scores.is_candidate(p) {
            continue;
        }
        let f = scores.scores[p];
        let below = negatives.partition_point(|&s| s < f);
        let not_above = negatives.partition_point(|&s| s <= f);
        credit += below as f64 + 0.5 * (not_above - below) as f64;
        positives += 1;
    }
    if positives == 0 {
        return Err(MetricError::EmptyProbe);
    }
    Ok(credit / (positives * negatives.len()) as f64)
}

/// `|list ∩ probe| / L`; the denominator stays L for shorter lists.
pub fn precision_user(list: &RecommendationList, probe_items: &[usize], l: usize) -> f64 {
    hits(list, probe_items) as f64 / l as f64
}

fn hits(list: &RecommendationList, probe_items: &[usize]) -> usize {
    list.items.iter().filter(|a| probe_items.contains(a)).count()
}

/// `1 − |common| / L`.
pub fn hamming_pair(a: &RecommendationList, b: &RecommendationList, l: usize) -> f64 {
    let mut sa = a.items.clone();
    let mut sb = b.items.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    1.0 - common_sorted(&sa, &sb) as f64 / l as f64
}

fn common_sorted(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

struct UserOutcome {
    auc: Option<f64>,
    hits: usize,
    list: Vec<usize>,
}

/// Evaluates UCF on `g` against the probe set.
///
/// AUC and precision are averaged over users with a non-empty probe set
/// (AUC skipping users without negatives). Lists only contain positively
/// scored items. H(L) averages over pairs of evaluated users with non-empty
/// lists, excluding self-pairs.
pub fn evaluate(g: &BipartiteGraph, probe: &ProbeSet, config: &EvalConfig) -> Result<MetricReport, MetricError> {
    evaluate_against(g, g, probe, config)
}

/// Evaluates recommendations computed on `g` for users whose collected
/// items are those of `collected`; this is the original training graph when
/// `g` is a link-reduced copy of it. Collected items are never recommended
/// and never serve as negatives, whether or not their link survived.
pub fn evaluate_against(
    g: &BipartiteGraph,
    collected: &BipartiteGraph,
    probe: &ProbeSet,
    config: &EvalConfig,
) -> Result<MetricReport, MetricError> {
    if probe.is_empty() {
        return Err(MetricError::EmptyProbe);
    }
    if config.l == 0 {
        return Err(MetricError::ZeroLength);
    }
    let groups = probe.by_user(g.num_users());
    let targets: Vec<(usize, &Vec<usize>)> = groups.iter().enumerate().filter(|(_, p)| !p.is_empty()).collect();
    if targets.is_empty() {
        return Err(MetricError::EmptyProbe);
    }

    let outcomes: Vec<UserOutcome> = targets
        .par_iter()
        .map(|&(user, probe_items)| {
            let mut sv = score_user(g, user);
            if !std::ptr::eq(g, collected) {
                for n in collected.user_neighbors(user) {
                    sv.excluded[n.node as usize] = true;
                }
            }
            let auc = auc_user(&sv, probe_items).ok();
            let list = top_l_scored(&sv, config.l);
            let hits = hits(&list, probe_items);
            let mut items = list.items;
            items.sort_unstable();
            UserOutcome { auc, hits, list: items }
        })
        .collect();

    let aucs: Vec<f64> = outcomes.iter().filter_map(|o| o.auc).collect();
    if aucs.is_empty() {
        return Err(MetricError::NoComparableUsers);
    }
    let auc = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let precision = outcomes.iter().map(|o| o.hits as f64 / config.l as f64).sum::<f64>() / outcomes.len() as f64;
    let short_lists = outcomes.iter().filter(|o| o.list.len() < config.l).count();

    let lists: Vec<&[usize]> = outcomes
        .iter()
        .filter(|o| !o.list.is_empty())
        .map(|o| o.list.as_slice())
        .collect();
    let (hamming, hamming_pairs, hamming_sampled) = mean_hamming(&lists, config);

    Ok(MetricReport {
        auc,
        precision,
        hamming,
        l: config.l,
        users_evaluated: outcomes.len(),
        users_without_negatives: outcomes.len() - aucs.len(),
        short_lists,
        hamming_pairs,
        hamming_sampled,
        macro_step: 0,
    })
}

fn mean_hamming(lists: &[&[usize]], config: &EvalConfig) -> (Option<f64>, usize, bool) {
    let n = lists.len();
    if n < 2 {
        return (None, 0, false);
    }
    let l = config.l as f64;
    let total_pairs = n * (n - 1) / 2;
    if total_pairs <= config.hamming_pair_cap {
        let row_sums: Vec<usize> = (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| common_sorted(lists[i], lists[j])).sum())
            .collect();
        let common: usize = row_sums.iter().sum();
        let mean = 1.0 - common as f64 / (l * total_pairs as f64);
        (Some(mean), total_pairs, false)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let samples = config.hamming_pair_cap.max(1);
        let mut common = 0usize;
        for _ in 0..samples {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            common += common_sorted(lists[i], lists[j]);
        }
        let mean = 1.0 - common as f64 / (l * samples as f64);
        (Some(mean), samples, true)
    }
}
