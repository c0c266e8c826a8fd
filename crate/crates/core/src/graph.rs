//! Timestamped user-item bipartite graph.
//!
//! Each side keeps a per-node neighbor list sorted by the opposite node
//! index, so set intersections between two nodes on the same side run in
//! `O(k_a + k_b)`. Links are addressed by a [`LinkId`] assigned in insertion
//! order; ids are never reused and double as the deterministic tie-breaker
//! for every removal ordering.

use std::fmt;

use thiserror::Error;

/// Identifier of a link, assigned in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u32);

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub user: usize,
    pub item: usize,
    pub timestamp: i64,
    pub id: LinkId,
}

/// A node reference on either side of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    User(usize),
    Item(usize),
}

/// Which side of the bipartite graph a query addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Users,
    Items,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub node: u32,
    pub link: LinkId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("user index {user} out of range (num_users = {num_users})")]
    UserOutOfRange { user: usize, num_users: usize },
    #[error("item index {item} out of range (num_items = {num_items})")]
    ItemOutOfRange { item: usize, num_items: usize },
    #[error("link ({user}, {item}) already present")]
    DuplicateLink { user: usize, item: usize },
    #[error("link id {0} is not live")]
    UnknownLink(LinkId),
    #[error("nodes must lie on the same side of the graph")]
    MixedSides,
    #[error("graph exceeds the link id space")]
    TooManyLinks,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BipartiteGraph {
    links: Vec<Option<Link>>,
    user_adj: Vec<Vec<Neighbor>>,
    item_adj: Vec<Vec<Neighbor>>,
    live: usize,
}

impl BipartiteGraph {
    pub fn new(num_users: usize, num_items: usize) -> Self {
        BipartiteGraph {
            links: Vec::new(),
            user_adj: vec![Vec::new(); num_users],
            item_adj: vec![Vec::new(); num_items],
            live: 0,
        }
    }

    pub fn num_users(&self) -> usize {
        self.user_adj.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_adj.len()
    }

    /// Number of live links.
    pub fn num_links(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// One past the largest id ever assigned.
    pub fn link_id_bound(&self) -> usize {
        self.links.len()
    }

    pub fn add_link(&mut self, user: usize, item: usize, timestamp: i64) -> Result<LinkId, GraphError> {
        self.check_user(user)?;
        self.check_item(item)?;
        let u_pos = match self.user_adj[user].binary_search_by_key(&(item as u32), |n| n.node) {
            Ok(_) => return Err(GraphError::DuplicateLink { user, item }),
            Err(pos) => pos,
        };
        let i_pos = self.item_adj[item]
            .binary_search_by_key(&(user as u32), |n| n.node)
            .expect_err("adjacency views out of sync");
        let raw = u32::try_from(self.links.len()).map_err(|_| GraphError::TooManyLinks)?;
        let id = LinkId(raw);
        self.links.push(Some(Link {
            user,
            item,
            timestamp,
            id,
        }));
        self.user_adj[user].insert(
            u_pos,
            Neighbor {
                node: item as u32,
                link: id,
            },
        );
        self.item_adj[item].insert(
            i_pos,
            Neighbor {
                node: user as u32,
                link: id,
            },
        );
        self.live += 1;
        Ok(id)
    }

    pub fn remove_link(&mut self, id: LinkId) -> Result<Link, GraphError> {
        let link = self
            .links
            .get_mut(id.0 as usize)
            .and_then(Option::take)
            .ok_or(GraphError::UnknownLink(id))?;
        let u_adj = &mut self.user_adj[link.user];
        let pos = u_adj
            .binary_search_by_key(&(link.item as u32), |n| n.node)
            .expect("adjacency views out of sync");
        u_adj.remove(pos);
        let i_adj = &mut self.item_adj[link.item];
        let pos = i_adj
            .binary_search_by_key(&(link.user as u32), |n| n.node)
            .expect("adjacency views out of sync");
        i_adj.remove(pos);
        self.live -= 1;
        Ok(link)
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.links.get(id.0 as usize).and_then(Option::as_ref)
    }

    pub fn contains(&self, user: usize, item: usize) -> bool {
        self.link_between(user, item).is_some()
    }

    pub fn link_between(&self, user: usize, item: usize) -> Option<LinkId> {
        let adj = self.user_adj.get(user)?;
        adj.binary_search_by_key(&(item as u32), |n| n.node)
            .ok()
            .map(|pos| adj[pos].link)
    }

    /// Live links in ascending id order.
    pub fn links(&self) -> impl Iterator<Item = &Link> + '_ {
        self.links.iter().flatten()
    }

    pub fn user_degree(&self, user: usize) -> usize {
        self.user_adj[user].len()
    }

    pub fn item_degree(&self, item: usize) -> usize {
        self.item_adj[item].len()
    }

    pub fn degree(&self, node: Node) -> usize {
        match node {
            Node::User(u) => self.user_degree(u),
            Node::Item(i) => self.item_degree(i),
        }
    }

    /// Items collected by `user`, sorted by item index.
    pub fn user_neighbors(&self, user: usize) -> &[Neighbor] {
        &self.user_adj[user]
    }

    /// Users who collected `item`, sorted by user index.
    pub fn item_neighbors(&self, item: usize) -> &[Neighbor] {
        &self.item_adj[item]
    }

    pub fn neighbors(&self, node: Node) -> &[Neighbor] {
        match node {
            Node::User(u) => &self.user_adj[u],
            Node::Item(i) => &self.item_adj[i],
        }
    }

    /// `|Γ_a ∩ Γ_b|` for two nodes on the same side.
    pub fn common_neighbor_count(&self, a: Node, b: Node) -> Result<usize, GraphError> {
        match (a, b) {
            (Node::User(x), Node::User(y)) => {
                self.check_user(x)?;
                self.check_user(y)?;
            }
            (Node::Item(x), Node::Item(y)) => {
                self.check_item(x)?;
                self.check_item(y)?;
            }
            _ => return Err(GraphError::MixedSides),
        }
        Ok(sorted_intersection_len(self.neighbors(a), self.neighbors(b)))
    }

    /// Number of rectangles (4-cycles) containing the link.
    pub fn rectangles_through_link(&self, id: LinkId) -> Result<usize, GraphError> {
        let link = *self.link(id).ok_or(GraphError::UnknownLink(id))?;
        let own = &self.user_adj[link.user];
        let total = self.item_adj[link.item]
            .iter()
            .filter(|n| n.node as usize != link.user)
            .map(|n| sorted_intersection_len(own, &self.user_adj[n.node as usize]) - 1)
            .sum();
        Ok(total)
    }

    /// Rectangle counts for every live link, indexed by link id (dead ids
    /// hold 0). Equivalent to calling [`Self::rectangles_through_link`] on each
    /// link, in `O(Σ_α k_α²)` overall.
    pub fn rectangle_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.links.len()];
        let mut shared = vec![0usize; self.num_users()];
        let mut touched = Vec::new();
        for (user, adj) in self.user_adj.iter().enumerate() {
            for n in adj {
                for other in &self.item_adj[n.node as usize] {
                    let j = other.node as usize;
                    if j != user {
                        if shared[j] == 0 {
                            touched.push(j);
                        }
                        shared[j] += 1;
                    }
                }
            }
            for n in adj {
                counts[n.link.0 as usize] = self.item_adj[n.node as usize]
                    .iter()
                    .filter(|o| o.node as usize != user)
                    .map(|o| shared[o.node as usize] - 1)
                    .sum();
            }
            for j in touched.drain(..) {
                shared[j] = 0;
            }
        }
        counts
    }

    /// Drops trailing users and items that have no links, shrinking the
    /// node index spaces. Interior isolated nodes are kept.
    pub fn trim_isolated_tail(&mut self) {
        while self.user_adj.last().is_some_and(Vec::is_empty) {
            self.user_adj.pop();
        }
        while self.item_adj.last().is_some_and(Vec::is_empty) {
            self.item_adj.pop();
        }
    }

    fn check_user(&self, user: usize) -> Result<(), GraphError> {
        if user < self.num_users() {
            Ok(())
        } else {
            Err(GraphError::UserOutOfRange {
                user,
                num_users: self.num_users(),
            })
        }
    }

    fn check_item(&self, item: usize) -> Result<(), GraphError> {
        if item < self.num_items() {
            Ok(())
        } else {
            Err(GraphError::ItemOutOfRange {
                item,
                num_items: self.num_items(),
            })
        }
    }
}

/// Size of the intersection of two neighbor lists sorted by node index.
pub fn sorted_intersection_len(a: &[Neighbor], b: &[Neighbor]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].node.cmp(&b[j].node) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}
