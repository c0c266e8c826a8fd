//! Brute-force reference implementations computed from a dense adjacency
//! matrix, plus graph generators. Shared with the acceptance suite.
#![allow(dead_code)]

use backbone_core::graph::{BipartiteGraph, Node};
use backbone_core::ingest::ProbeSet;
use backbone_core::recommend::{salton_similarity, score_user};
use backbone_core::structure::{assortativity, c4_node, c4_values};
use rand::Rng;

pub struct Dense {
    pub a: Vec<Vec<bool>>,
    pub n: usize,
    pub m: usize,
}

impl Dense {
    pub fn of(g: &BipartiteGraph) -> Dense {
        let (n, m) = (g.num_users(), g.num_items());
        let mut a = vec![vec![false; m]; n];
        for l in g.links() {
            a[l.user][l.item] = true;
        }
        Dense { a, n, m }
    }

    fn ku(&self, u: usize) -> usize {
        self.a[u].iter().filter(|&&x| x).count()
    }

    fn ki(&self, i: usize) -> usize {
        (0..self.n).filter(|&u| self.a[u][i]).count()
    }
}

pub fn salton(d: &Dense, i: usize, j: usize) -> f64 {
    let (ki, kj) = (d.ku(i), d.ku(j));
    if ki == 0 || kj == 0 {
        return 0.0;
    }
    let shared = (0..d.m).filter(|&a| d.a[i][a] && d.a[j][a]).count();
    shared as f64 / ((ki * kj) as f64).sqrt()
}

pub fn scores(d: &Dense, i: usize) -> Vec<f64> {
    (0..d.m)
        .map(|alpha| (0..d.n).filter(|&j| d.a[j][alpha]).map(|j| salton(d, i, j)).sum())
        .collect()
}

pub fn rectangles(d: &Dense, u: usize, i: usize) -> usize {
    let mut count = 0;
    for v in 0..d.n {
        for j in 0..d.m {
            if v != u && j != i && d.a[u][j] && d.a[v][i] && d.a[v][j] {
                count += 1;
            }
        }
    }
    count
}

/// Numerator and denominator of the local rectangle clustering coefficient,
/// or `None` for nodes of degree below 2.
pub fn c4_parts(d: &Dense, node: Node) -> Option<(u64, u64)> {
    // Neighbour sets as index lists on the opposite side.
    let (nbrs, nbr_sets): (Vec<usize>, Vec<Vec<usize>>) = match node {
        Node::User(u) => {
            let nb: Vec<usize> = (0..d.m).filter(|&i| d.a[u][i]).collect();
            let sets = nb.iter().map(|&i| (0..d.n).filter(|&v| d.a[v][i]).collect()).collect();
            (nb, sets)
        }
        Node::Item(i) => {
            let nb: Vec<usize> = (0..d.n).filter(|&u| d.a[u][i]).collect();
            let sets = nb.iter().map(|&u| (0..d.m).filter(|&j| d.a[u][j]).collect()).collect();
            (nb, sets)
        }
    };
    if nbrs.len() < 2 {
        return None;
    }
    let own = match node {
        Node::User(u) => u,
        Node::Item(i) => i,
    };
    let (mut num, mut den) = (0u64, 0u64);
    for x in 0..nbrs.len() {
        for y in x + 1..nbrs.len() {
            let (sm, sn) = (&nbr_sets[x], &nbr_sets[y]);
            let q = sm.iter().filter(|v| **v != own && sn.contains(v)).count() as u64;
            let eta = 1 + q;
            let a = (sm.len() as u64 - eta) * (sn.len() as u64 - eta);
            num += q;
            den += a + q;
        }
    }
    Some((num, den))
}

/// Two-pass Pearson correlation over the doubled endpoint-degree list
/// (each link contributes `(k_u, k_i)` and `(k_i, k_u)`).
pub fn assortativity_pearson(d: &Dense) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for u in 0..d.n {
        for i in 0..d.m {
            if d.a[u][i] {
                let (ku, ki) = (d.ku(u) as f64, d.ki(i) as f64);
                xs.extend([ku, ki]);
                ys.extend([ki, ku]);
            }
        }
    }
    if xs.len() < 4 {
        return None;
    }
    let distinct = xs.iter().any(|&x| x != xs[0]);
    if !distinct {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    Some(cov / (vx * vy).sqrt())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Checks every brute-forced quantity of `g`; returns the first mismatch.
pub fn check_graph(g: &BipartiteGraph) -> Result<(), String> {
    let d = Dense::of(g);
    for i in 0..d.n {
        for j in 0..d.n {
            let (got, want) = (salton_similarity(g, i, j), salton(&d, i, j));
            if got != want {
                return Err(format!("salton({i},{j}) = {got}, brute {want}"));
            }
        }
        let sv = score_user(g, i);
        for (alpha, want) in scores(&d, i).into_iter().enumerate() {
            if !close(sv.scores[alpha], want, 1e-12) {
                return Err(format!("score({i},{alpha}) = {}, brute {want}", sv.scores[alpha]));
            }
        }
    }
    let counts = g.rectangle_counts();
    for l in g.links() {
        let want = rectangles(&d, l.user, l.item);
        let got = g.rectangles_through_link(l.id).unwrap();
        if got != want || counts[l.id.0 as usize] != want {
            return Err(format!(
                "rectangles({},{}) = {got}/{}, brute {want}",
                l.user, l.item, counts[l.id.0 as usize]
            ));
        }
    }
    let (bulk_u, bulk_i) = c4_values(g);
    let nodes = (0..d.n).map(Node::User).chain((0..d.m).map(Node::Item));
    for node in nodes {
        let want = c4_parts(&d, node).and_then(|(num, den)| (den > 0).then(|| num as f64 / den as f64));
        let bulk = match node {
            Node::User(u) => bulk_u[u],
            Node::Item(i) => bulk_i[i],
        };
        if c4_node(g, node) != want || bulk != want {
            return Err(format!(
                "c4({node:?}) = {:?}/{bulk:?}, brute {want:?}",
                c4_node(g, node)
            ));
        }
    }
    match (assortativity(g), assortativity_pearson(&d)) {
        (None, None) => {}
        (Some(a), Some(b)) if (a - b).abs() <= 1e-12 => {}
        (a, b) => return Err(format!("assortativity = {a:?}, brute {b:?}")),
    }
    Ok(())
}

/// Every bipartite graph with `n` users and `m` items, by link bitmask.
pub fn all_graphs(n: usize, m: usize) -> impl Iterator<Item = BipartiteGraph> {
    let slots = n * m;
    (0u32..1 << slots).map(move |mask| {
        let mut g = BipartiteGraph::new(n, m);
        for s in 0..slots {
            if mask >> s & 1 == 1 {
                g.add_link(s / m, s % m, s as i64).unwrap();
            }
        }
        g
    })
}

/// Shapes `(n, m)` with at most `max_slots` possible links and at most
/// `max_nodes` nodes.
pub fn exhaustive_shapes(max_nodes: usize, max_slots: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..max_nodes {
        for m in 1..=max_nodes - n {
            if n * m <= max_slots {
                out.push((n, m));
            }
        }
    }
    out
}

pub fn random_graph<R: Rng>(rng: &mut R, max_users: usize, max_items: usize) -> BipartiteGraph {
    let n = rng.gen_range(1..=max_users);
    let m = rng.gen_range(1..=max_items);
    let p: f64 = rng.gen_range(0.05..0.8);
    let mut g = BipartiteGraph::new(n, m);
    for u in 0..n {
        for i in 0..m {
            if rng.gen_bool(p) {
                g.add_link(u, i, rng.gen_range(0..1000)).unwrap();
            }
        }
    }
    g
}

/// A random graph of at most `max_nodes` nodes in total.
pub fn random_small_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> BipartiteGraph {
    let n = rng.gen_range(1..max_nodes);
    let m = rng.gen_range(1..=max_nodes - n);
    random_graph(rng, n, m)
}

/// Random probe set of absent pairs, with every user having at least one
/// probe item when possible.
pub fn random_probe<R: Rng>(rng: &mut R, g: &BipartiteGraph, p: f64) -> ProbeSet {
    let mut pairs = Vec::new();
    for u in 0..g.num_users() {
        for i in 0..g.num_items() {
            if !g.contains(u, i) && rng.gen_bool(p) {
                pairs.push((u, i));
            }
        }
    }
    ProbeSet::new(pairs)
}

/// Monte-Carlo estimate of the ranking AUC: per user, `n` draws of a
/// (probe item, negative item) pair, scoring 1 for a win and 0.5 for a tie,
/// averaged over users that have both kinds of items.
pub fn monte_carlo_auc<R: Rng>(g: &BipartiteGraph, probe: &ProbeSet, n: usize, rng: &mut R) -> Option<f64> {
    let groups = probe.by_user(g.num_users());
    let mut per_user = Vec::new();
    for (u, items) in groups.iter().enumerate() {
        if items.is_empty() {
            continue;
        }
        let sv = score_user(g, u);
        let pos: Vec<f64> = items
            .iter()
            .filter(|&&a| sv.is_candidate(a))
            .map(|&a| sv.scores[a])
            .collect();
        let neg: Vec<f64> = (0..g.num_items())
            .filter(|&a| sv.is_candidate(a) && !items.contains(&a))
            .map(|a| sv.scores[a])
            .collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        let mut credit = 0.0;
        for _ in 0..n {
            let (x, y) = (pos[rng.gen_range(0..pos.len())], neg[rng.gen_range(0..neg.len())]);
            credit += if x > y {
                1.0
            } else if x == y {
                0.5
            } else {
                0.0
            };
        }
        per_user.push(credit / n as f64);
    }
    (!per_user.is_empty()).then(|| per_user.iter().sum::<f64>() / per_user.len() as f64)
}
