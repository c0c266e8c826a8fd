//! Backbone extraction with the hybrid SOR/MPR removal.
//!
//! For each λ of a grid, links are removed until the first macro-step whose
//! AUC falls below `threshold · AUC_0`; the last step before it is that λ's
//! stopping step `b(λ)`. The chosen λ* removes the most links at its stopping
//! step, ties going to the higher H(L) and then to the smaller λ.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{BipartiteGraph, LinkId};
use crate::ingest::ProbeSet;
use crate::metrics::{evaluate, evaluate_against, EvalConfig, MetricReport};
use crate::removal::{Algorithm, RemovalError, RemovalRun, DEFAULT_STEPS};
use crate::structure::{structure_report, StructureReport};

pub const DEFAULT_THRESHOLD: f64 = 0.95;

/// `{0.0, 0.1, …, 1.0}`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackboneConfig {
    pub lambda_grid: Vec<f64>,
    pub threshold: f64,
    pub seed: u64,
    pub steps: usize,
    pub eval: EvalConfig,
}

impl Default for BackboneConfig {
    fn default() -> Self {
        BackboneConfig {
            lambda_grid: default_lambda_grid(),
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            steps: DEFAULT_STEPS,
            eval: EvalConfig::default(),
        }
    }
}

/// Outcome of one λ run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaOutcome {
    pub lambda: f64,
    pub stop_step: usize,
    pub removed_links: usize,
    pub auc: f64,
    pub precision: f64,
    pub hamming: Option<f64>,
    #[serde(skip)]
    removed: Vec<LinkId>,
}

#[derive(Debug, Clone)]
pub struct BackboneResult {
    pub lambda_star: f64,
    pub stop_step: usize,
    pub backbone: BipartiteGraph,
    pub fraction_removed: f64,
    pub metrics_initial: MetricReport,
    pub metrics_backbone: MetricReport,
    pub structure_initial: StructureReport,
    pub structure_backbone: StructureReport,
    /// One entry per grid value, in grid order.
    pub selection: Vec<LambdaOutcome>,
    /// Every λ violated the threshold at step 1; the backbone is the
    /// original graph.
    pub degenerate: bool,
}

/// Per-λ random stream: the master seed with the grid index as stream id.
pub fn lambda_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs hybrid removal for grid entry `index` until the first step whose AUC
/// drops below `floor`.
fn run_lambda(
    g0: &BipartiteGraph,
    probe: &ProbeSet,
    config: &BackboneConfig,
    index: usize,
    floor: f64,
    initial: &MetricReport,
) -> Result<LambdaOutcome, RemovalError> {
    let lambda = config.lambda_grid[index];
    let rng = lambda_rng(config.seed, index);
    let mut run = RemovalRun::with_rng(g0.clone(), Algorithm::hybrid(lambda)?, rng, config.steps)?;
    let mut last = initial.clone();
    let mut kept = Vec::new();
    let mut stop = 0;
    while let Some(removed) = run.advance() {
        let metrics = evaluate_against(run.graph(), g0, probe, &config.eval)?;
        if metrics.auc < floor {
            break;
        }
        stop = run.current_step();
        kept.extend(removed);
        last = metrics;
        last.macro_step = stop;
    }
    Ok(LambdaOutcome {
        lambda,
        stop_step: stop,
        removed_links: run.schedule().removed_after(stop),
        auc: last.auc,
        precision: last.precision,
        hamming: last.hamming,
        removed: kept,
    })
}

fn better(a: &LambdaOutcome, b: &LambdaOutcome) -> bool {
    let ha = a.hamming.unwrap_or(f64::NEG_INFINITY);
    let hb = b.hamming.unwrap_or(f64::NEG_INFINITY);
    (a.removed_links, ha) > (b.removed_links, hb)
        || ((a.removed_links, ha) == (b.removed_links, hb) && a.lambda < b.lambda)
}

pub fn extract_backbone(
    g0: &BipartiteGraph,
    probe: &ProbeSet,
    config: &BackboneConfig,
) -> Result<BackboneResult, RemovalError> {
    if config.lambda_grid.is_empty() {
        return Err(RemovalError::InvalidLambda(f64::NAN));
    }
    for &lambda in &config.lambda_grid {
        Algorithm::hybrid(lambda)?;
    }
    let metrics_initial = evaluate(g0, probe, &config.eval)?;
    let floor = config.threshold * metrics_initial.auc;

    let selection: Vec<LambdaOutcome> = (0..config.lambda_grid.len())
        .into_par_iter()
        .map(|k| run_lambda(g0, probe, config, k, floor, &metrics_initial))
        .collect::<Result<_, _>>()?;

    let best = (1..selection.len()).fold(0, |best, k| {
        if better(&selection[k], &selection[best]) {
            k
        } else {
            best
        }
    });
    let best = &selection[best];

    let mut backbone = g0.clone();
    for &id in &best.removed {
        backbone.remove_link(id).expect("removed links come from g0");
    }
    let mut metrics_backbone = evaluate_against(&backbone, g0, probe, &config.eval)?;
    metrics_backbone.macro_step = best.stop_step;
    let fraction_removed = if g0.num_links() == 0 {
        0.0
    } else {
        1.0 - backbone.num_links() as f64 / g0.num_links() as f64
    };
    let (lambda_star, stop_step) = (best.lambda, best.stop_step);
    Ok(BackboneResult {
        fraction_removed,
        structure_initial: structure_report(g0),
        structure_backbone: structure_report(&backbone),
        metrics_initial,
        metrics_backbone,
        degenerate: selection.iter().all(|o| o.stop_step == 0),
        lambda_star,
        stop_step,
        backbone,
        selection,
    })
}

/// One column of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonColumn {
    pub label: String,
    pub metrics: Option<MetricReport>,
    pub structure: StructureReport,
}

impl ComparisonColumn {
    /// Measures `g`, a link subset of `original`, against the probe set.
    pub fn measure(
        label: impl Into<String>,
        g: &BipartiteGraph,
        original: &BipartiteGraph,
        probe: &ProbeSet,
        eval: &EvalConfig,
    ) -> Self {
        ComparisonColumn {
            label: label.into(),
            metrics: evaluate_against(g, original, probe, eval).ok(),
            structure: structure_report(g),
        }
    }

    /// The ten comparison rows, in table order.
    pub fn rows(&self) -> [(&'static str, Option<f64>); 10] {
        let m = self.metrics.as_ref();
        let s = &self.structure;
        [
            ("AUC", m.map(|m| m.auc)),
            ("P(L)", m.map(|m| m.precision)),
            ("H(L)", m.and_then(|m| m.hamming)),
            ("C4_user", s.c4_user),
            ("C4_item", s.c4_item),
            ("C4_net", s.c4_net),
            ("r", s.assortativity),
            ("H_user", s.h_user),
            ("H_item", s.h_item),
            ("DR", s.diffusion_range),
        ]
    }
}

pub const COMPARISON_ROWS: [&str; 10] = [
    "AUC", "P(L)", "H(L)", "C4_user", "C4_item", "C4_net", "r", "H_user", "H_item", "DR",
];

/// Side-by-side metrics and structure of an original graph and its
/// backbone, both evaluated against the same probe set.
pub fn compare_structure(
    original: &BipartiteGraph,
    backbone: &BipartiteGraph,
    probe: &ProbeSet,
    eval: &EvalConfig,
) -> Vec<ComparisonColumn> {
    vec![
        ComparisonColumn::measure("InitialData", original, original, probe, eval),
        ComparisonColumn::measure("Backbone", backbone, original, probe, eval),
    ]
}

impl BackboneResult {
    pub fn comparison(&self) -> Vec<ComparisonColumn> {
        vec![
            ComparisonColumn {
                label: "InitialData".into(),
                metrics: Some(self.metrics_initial.clone()),
                structure: self.structure_initial,
            },
            ComparisonColumn {
                label: format!("Hybrid_{}^{}", self.lambda_star, self.stop_step),
                metrics: Some(self.metrics_backbone.clone()),
                structure: self.structure_backbone,
            },
        ]
    }
}
