//! Information backbone extraction for user-item bipartite networks.
//!
//! Links of a timestamped training graph are removed in macro-steps by
//! time-aware, topology-aware, random or hybrid strategies, while user-based
//! collaborative filtering is evaluated against a fixed probe set after each
//! step. The hybrid SOR/MPR strategy plus an AUC stopping rule extracts a
//! sparse backbone that keeps most of the recommendation accuracy.

pub mod backbone;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod recommend;
pub mod removal;
pub mod structure;

pub use backbone::{extract_backbone, BackboneConfig, BackboneResult};
pub use graph::{BipartiteGraph, Link, LinkId, Node, Side};
pub use ingest::{Dataset, ProbeSet};
pub use metrics::{evaluate, EvalConfig, MetricReport};
pub use removal::{run, Algorithm, RemovalTrace, RunConfig, Schedule};
pub use structure::{structure_report, StructureReport};
