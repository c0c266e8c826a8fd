//! Structural indices: C4 clustering, degree assortativity, degree
//! heterogeneity and 3-step diffusion range.
//!
//! Statistics that are undefined on a given graph (no includable nodes,
//! zero variance, ...) are reported as `None`, never as 0.

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{sorted_intersection_len, BipartiteGraph, Neighbor, Node, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureReport {
    pub c4_user: Option<f64>,
    pub c4_item: Option<f64>,
    pub c4_net: Option<f64>,
    pub assortativity: Option<f64>,
    pub h_user: Option<f64>,
    pub h_item: Option<f64>,
    pub diffusion_range: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C4Scope {
    Users,
    Items,
    All,
}

pub fn structure_report(g: &BipartiteGraph) -> StructureReport {
    let (users, items) = c4_values(g);
    StructureReport {
        c4_user: mean_defined(users.iter()),
        c4_item: mean_defined(items.iter()),
        c4_net: mean_defined(users.iter().chain(items.iter())),
        assortativity: assortativity(g),
        h_user: heterogeneity(g, Side::Users),
        h_item: heterogeneity(g, Side::Items),
        diffusion_range: diffusion_range_avg(g),
    }
}

fn mean_defined<'a>(values: impl Iterator<Item = &'a Option<f64>>) -> Option<f64> {
    let (sum, count) = values.flatten().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Local C4 coefficient of one node: over pairs (m, n) of its neighbors,
/// `Σ q / Σ (a + q)` with `q` the common neighbors of m and n other than the
/// node itself and `a = (k_m − 1 − q)(k_n − 1 − q)`.
///
/// `None` for nodes of degree below 2 and when no rectangle is possible.
pub fn c4_node(g: &BipartiteGraph, node: Node) -> Option<f64> {
    let nbrs = g.neighbors(node);
    if nbrs.len() < 2 {
        return None;
    }
    let pivot = |n: &Neighbor| match node {
        Node::User(_) => Node::Item(n.node as usize),
        Node::Item(_) => Node::User(n.node as usize),
    };
    let (mut num, mut den) = (0u64, 0u64);
    for (a, m) in nbrs.iter().enumerate() {
        let m = pivot(m);
        for n in &nbrs[a + 1..] {
            let n = pivot(n);
            let q = sorted_intersection_len(g.neighbors(m), g.neighbors(n)) as u64 - 1;
            let (km, kn) = (g.degree(m) as u64, g.degree(n) as u64);
            num += q;
            den += (km - 1 - q) * (kn - 1 - q) + q;
        }
    }
    (den > 0).then(|| num as f64 / den as f64)
}

/// Local C4 for every user and every item, in `O(Σ_links k)` time.
pub fn c4_values(g: &BipartiteGraph) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    (c4_side(g, Side::Users), c4_side(g, Side::Items))
}

fn c4_side(g: &BipartiteGraph, side: Side) -> Vec<Option<f64>> {
    let (n_centers, n_pivots) = match side {
        Side::Users => (g.num_users(), g.num_items()),
        Side::Items => (g.num_items(), g.num_users()),
    };
    let center_adj = |i: usize| match side {
        Side::Users => g.user_neighbors(i),
        Side::Items => g.item_neighbors(i),
    };
    let pivot_adj = |m: usize| match side {
        Side::Users => g.item_neighbors(m),
        Side::Items => g.user_neighbors(m),
    };

    // Each pivot m contributes to every center i ∈ Γ_m, paired with the
    // other pivots n > m of i. Partial sums per center are merged in pivot
    // order, so the result is independent of scheduling.
    let partials: Vec<Vec<(u32, u64, u64)>> = (0..n_pivots)
        .into_par_iter()
        .map_init(
            || vec![0u32; n_pivots],
            |shared, m| {
                let mut touched = Vec::new();
                for j in pivot_adj(m) {
                    for n in center_adj(j.node as usize) {
                        let n = n.node as usize;
                        if n > m {
                            if shared[n] == 0 {
                                touched.push(n);
                            }
                            shared[n] += 1;
                        }
                    }
                }
                let km = pivot_adj(m).len() as u64;
                let mut out = Vec::with_capacity(pivot_adj(m).len());
                for i in pivot_adj(m) {
                    let (mut num, mut den) = (0u64, 0u64);
                    for n in center_adj(i.node as usize) {
                        let n = n.node as usize;
                        if n <= m {
                            continue;
                        }
                        let q = shared[n] as u64 - 1;
                        let kn = pivot_adj(n).len() as u64;
                        num += q;
                        den += (km - 1 - q) * (kn - 1 - q) + q;
                    }
                    out.push((i.node, num, den));
                }
                for n in touched {
                    shared[n] = 0;
                }
                out
            },
        )
        .collect();

    let mut num = vec![0u64; n_centers];
    let mut den = vec![0u64; n_centers];
    for part in partials {
        for (i, a, b) in part {
            num[i as usize] += a;
            den[i as usize] += b;
        }
    }
    (0..n_centers)
        .map(|i| (center_adj(i).len() >= 2 && den[i] > 0).then(|| num[i] as f64 / den[i] as f64))
        .collect()
}

/// Mean local C4 over includable nodes of the chosen scope.
pub fn c4_average(g: &BipartiteGraph, scope: C4Scope) -> Option<f64> {
    let (users, items) = c4_values(g);
    match scope {
        C4Scope::Users => mean_defined(users.iter()),
        C4Scope::Items => mean_defined(items.iter()),
        C4Scope::All => mean_defined(users.iter().chain(items.iter())),
    }
}

/// Pearson correlation of endpoint degrees over links, with each link's
/// endpoints taken symmetrically.
///
/// Accumulated in integers, so a degenerate (zero-variance) degree sequence
/// is detected exactly and yields `None`.
pub fn assortativity(g: &BipartiteGraph) -> Option<f64> {
    let e = g.num_links() as i128;
    if e < 2 {
        return None;
    }
    let (mut prod, mut sum, mut sq) = (0i128, 0i128, 0i128);
    for link in g.links() {
        let ku = g.user_degree(link.user) as i128;
        let ki = g.item_degree(link.item) as i128;
        prod += ku * ki;
        sum += ku + ki;
        sq += ku * ku + ki * ki;
    }
    // Both terms scaled by 4E².
    let num = 4 * e * prod - sum * sum;
    let den = 2 * e * sq - sum * sum;
    (den != 0).then(|| num as f64 / den as f64)
}

/// `⟨k²⟩ / ⟨k⟩²` over the nodes of one side with nonzero degree.
pub fn heterogeneity(g: &BipartiteGraph, side: Side) -> Option<f64> {
    let degrees: Vec<u64> = match side {
        Side::Users => (0..g.num_users()).map(|u| g.user_degree(u) as u64).collect(),
        Side::Items => (0..g.num_items()).map(|i| g.item_degree(i) as u64).collect(),
    };
    let (n, s, s2) = degrees
        .iter()
        .filter(|&&k| k > 0)
        .fold((0u64, 0u64, 0u64), |(n, s, s2), &k| (n + 1, s + k, s2 + k * k));
    (n > 0).then(|| (n as f64 * s2 as f64) / (s as f64 * s as f64))
}

struct Reach {
    user_seen: Vec<u32>,
    item_seen: Vec<u32>,
    stamp: u32,
}

impl Reach {
    fn new(g: &BipartiteGraph) -> Self {
        Reach {
            user_seen: vec![0; g.num_users()],
            item_seen: vec![0; g.num_items()],
            stamp: 0,
        }
    }

    /// Nodes reached within three hops of `start`, the start excluded.
    fn covered(&mut self, g: &BipartiteGraph, start: Node) -> usize {
        self.stamp += 1;
        let stamp = self.stamp;
        let mut frontier = vec![start];
        match start {
            Node::User(u) => self.user_seen[u] = stamp,
            Node::Item(i) => self.item_seen[i] = stamp,
        }
        let mut covered = 0;
        for _ in 0..3 {
            let mut next = Vec::new();
            for node in frontier {
                for n in g.neighbors(node) {
                    let (seen, reached) = match node {
                        Node::User(_) => (&mut self.item_seen[n.node as usize], Node::Item(n.node as usize)),
                        Node::Item(_) => (&mut self.user_seen[n.node as usize], Node::User(n.node as usize)),
                    };
                    if *seen != stamp {
                        *seen = stamp;
                        covered += 1;
                        next.push(reached);
                    }
                }
            }
            frontier = next;
        }
        covered
    }
}

/// Fraction of the other `N + M − 1` nodes reached within three steps.
pub fn diffusion_range(g: &BipartiteGraph, node: Node) -> f64 {
    let others = g.num_users() + g.num_items();
    if others <= 1 {
        return 0.0;
    }
    Reach::new(g).covered(g, node) as f64 / (others - 1) as f64
}

/// Mean diffusion range over nodes with at least one link.
pub fn diffusion_range_avg(g: &BipartiteGraph) -> Option<f64> {
    let starts: Vec<Node> = (0..g.num_users())
        .filter(|&u| g.user_degree(u) > 0)
        .map(Node::User)
        .chain((0..g.num_items()).filter(|&i| g.item_degree(i) > 0).map(Node::Item))
        .collect();
    if starts.is_empty() {
        return None;
    }
    let denom = (g.num_users() + g.num_items() - 1) as f64;
    let covered: Vec<usize> = starts
        .par_iter()
        .map_init(|| Reach::new(g), |reach, &s| reach.covered(g, s))
        .collect();
    let total: f64 = covered.iter().map(|&c| c as f64 / denom).sum();
    Some(total / starts.len() as f64)
}
