//! User-based collaborative filtering with the Salton (cosine) index.

use crate::graph::{sorted_intersection_len, BipartiteGraph};

/// `|Γ_i ∩ Γ_j| / sqrt(k_i k_j)`, or 0 when either user has no links.
pub fn salton_similarity(g: &BipartiteGraph, i: usize, j: usize) -> f64 {
    let (ki, kj) = (g.user_degree(i), g.user_degree(j));
    if ki == 0 || kj == 0 {
        return 0.0;
    }
    let shared = sorted_intersection_len(g.user_neighbors(i), g.user_neighbors(j));
    shared as f64 / ((ki * kj) as f64).sqrt()
}

/// Nonzero similarities of user `i` to every user (itself included), in
/// ascending user order.
pub fn similarity_row(g: &BipartiteGraph, i: usize) -> Vec<(usize, f64)> {
    let ki = g.user_degree(i);
    if ki == 0 {
        return Vec::new();
    }
    let mut shared = vec![0u32; g.num_users()];
    for n in g.user_neighbors(i) {
        for other in g.item_neighbors(n.node as usize) {
            shared[other.node as usize] += 1;
        }
    }
    shared
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(j, &c)| (j, c as f64 / ((ki * g.user_degree(j)) as f64).sqrt()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub user: usize,
    pub scores: Vec<f64>,
    /// Items the user already collected; never recommended.
    pub excluded: Vec<bool>,
}

impl ScoreVector {
    pub fn is_candidate(&self, item: usize) -> bool {
        !self.excluded[item]
    }
}

/// `f_α = Σ_j s_ij a_jα` over all users `j`, including `j = i`.
pub fn score_user(g: &BipartiteGraph, i: usize) -> ScoreVector {
    let mut scores = vec![0.0; g.num_items()];
    for (j, s) in similarity_row(g, i) {
        for n in g.user_neighbors(j) {
            scores[n.node as usize] += s;
        }
    }
    let mut excluded = vec![false; g.num_items()];
    for n in g.user_neighbors(i) {
        excluded[n.node as usize] = true;
    }
    ScoreVector {
        user: i,
        scores,
        excluded,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecommendationList {
    pub user: usize,
    pub items: Vec<usize>,
}

impl RecommendationList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The `l` highest-scoring candidate items, descending, ties by ascending
/// item index. Shorter than `l` when there are fewer candidates.
pub fn top_l(scores: &ScoreVector, l: usize) -> RecommendationList {
    rank_candidates(scores, l, |_| true)
}

/// Like [`top_l`] but only items with a strictly positive score qualify.
/// A zero score carries no evidence from any similar user, so evaluation
/// does not treat such items as recommendations.
pub fn top_l_scored(scores: &ScoreVector, l: usize) -> RecommendationList {
    rank_candidates(scores, l, |s| s > 0.0)
}

fn rank_candidates(scores: &ScoreVector, l: usize, keep: impl Fn(f64) -> bool) -> RecommendationList {
    let mut candidates: Vec<usize> = (0..scores.scores.len())
        .filter(|&a| scores.is_candidate(a) && keep(scores.scores[a]))
        .collect();
    let order = |a: &usize, b: &usize| scores.scores[*b].total_cmp(&scores.scores[*a]).then(a.cmp(b));
    if l == 0 {
        candidates.clear();
    } else if candidates.len() > l {
        candidates.select_nth_unstable_by(l - 1, order);
        candidates.truncate(l);
    }
    candidates.sort_unstable_by(order);
    RecommendationList {
        user: scores.user,
        items: candidates,
    }
}
