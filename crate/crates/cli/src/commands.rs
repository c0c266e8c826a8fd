//! Subcommand implementations. Every command writes into its output
//! directory through [`Outputs`], which deletes what it wrote if the command
//! fails before finishing.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use backbone_core::backbone::{extract_backbone, BackboneConfig, ComparisonColumn};
use backbone_core::export::{write_comparison, write_edge_list, write_selection_log, write_structure, write_trace_csv};
use backbone_core::ingest::{
    filter_cold_start, graph_from_records, parse_ratings, temporal_split, Dataset, FormatConfig, IngestManifest,
    RatingRecord, SplitConfig,
};
use backbone_core::removal::{run, RemovalRun, RunConfig};
use backbone_core::{evaluate, structure_report, Algorithm, EvalConfig, MetricReport, StructureReport};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Command, Settings};
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const TRAINING_EDGES: &str = "training_edges.txt";
pub const PROBE_EDGES: &str = "probe_edges.txt";
pub const BACKBONE_EDGES: &str = "backbone_edges.txt";
pub const LAMBDA_SELECTION: &str = "lambda_selection.csv";
pub const COMPARISON: &str = "comparison.csv";
pub const STATS: &str = "stats.csv";

pub fn trace_file(alg: &Algorithm) -> String {
    format!("trace_{}.csv", alg.slug())
}

/// Files written by one command, removed again on drop unless committed.
struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    committed: bool,
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

impl Outputs {
    fn create(dir: &Path) -> Result<Outputs, CliError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
            committed: false,
        })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        self.files.push(path.clone());
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(&path, e))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_hash: String,
    config: &'a Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    dataset: Option<IngestManifest>,
    result: T,
}

/// SHA-256 over the command name and the canonical JSON of the settings.
pub fn config_hash(command: &str, settings: &Settings) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(settings).expect("settings serialise"));
    hex::encode(h.finalize())
}

fn manifest<'a, T: Serialize>(
    command: &'static str,
    settings: &'a Settings,
    dataset: Option<IngestManifest>,
    result: T,
) -> Manifest<'a, T> {
    Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config_hash: config_hash(command, settings),
        config: settings,
        dataset,
        result,
    }
}

fn read_records(s: &Settings) -> Result<Vec<RatingRecord>, CliError> {
    let file = File::open(&s.input).map_err(|e| io_err(&s.input, e))?;
    let format = FormatConfig {
        delimiter: s.format,
        lenient: s.lenient,
    };
    let parsed = parse_ratings(BufReader::new(file), format)
        .map_err(|e| CliError::Data(format!("{}: {e}", s.input.display())))?;
    if parsed.skipped > 0 {
        eprintln!("warning: skipped {} malformed lines", parsed.skipped);
    }
    Ok(parsed.records)
}

fn load_dataset(s: &Settings) -> Result<(Dataset, SplitConfig), CliError> {
    let records = read_records(s)?;
    let split = SplitConfig {
        cutoff: s.cutoff_spec.resolve(&records)?,
        probe_ratio: s.probe_ratio,
        rating_min: s.rating_min,
        seed: s.seed,
    };
    let dataset = filter_cold_start(temporal_split(&records, &split)?);
    Ok((dataset, split))
}

fn load_evaluable(s: &Settings) -> Result<(Dataset, SplitConfig), CliError> {
    let (dataset, split) = load_dataset(s)?;
    if dataset.probe.is_empty() {
        return Err(CliError::Data(
            "probe set is empty after the split and cold-start filtering".into(),
        ));
    }
    Ok((dataset, split))
}

fn eval_config(s: &Settings) -> EvalConfig {
    EvalConfig {
        l: s.l,
        hamming_pair_cap: s.hamming_cap,
        seed: s.seed,
    }
}

pub fn execute(command: &Command, s: &Settings) -> Result<(), CliError> {
    match command {
        Command::Ingest(_) => ingest(s),
        Command::Sweep(_) => sweep(s),
        Command::Backbone(_) => backbone(s),
        Command::Stats(_) => stats(s),
        Command::Report(_) => report(s),
    }
}

fn ingest(s: &Settings) -> Result<(), CliError> {
    let dir = s.out_dir()?;
    let (ds, split) = load_dataset(s)?;
    let mut out = Outputs::create(dir)?;
    out.write(TRAINING_EDGES, |w| {
        write_edge_list(w, &ds.training, &ds.users, &ds.items)
    })?;
    out.write(PROBE_EDGES, |w| {
        for &(u, i) in ds.probe.pairs() {
            writeln!(w, "{} {}", ds.users.raw(u), ds.items.raw(i))?;
        }
        Ok(())
    })?;
    out.write_json(MANIFEST, &manifest("ingest", s, Some(ds.manifest(&split)), ()))?;
    out.commit();
    Ok(())
}

#[derive(Serialize)]
struct SweepEntry {
    algorithm: Algorithm,
    file: String,
    links_removed: usize,
    final_auc: f64,
}

#[derive(Serialize)]
struct SweepResult {
    steps: usize,
    initial: MetricReport,
    initial_structure: Option<StructureReport>,
    traces: Vec<SweepEntry>,
}

fn sweep(s: &Settings) -> Result<(), CliError> {
    let dir = s.out_dir()?;
    let (ds, split) = load_evaluable(s)?;
    let config = RunConfig {
        steps: s.steps,
        eval: eval_config(s),
        structure: s.structure,
    };
    let traces = s
        .algos
        .par_iter()
        .map(|&alg| run(&ds.training, alg, &ds.probe, s.seed, &config))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Outputs::create(dir)?;
    for trace in &traces {
        out.write(&trace_file(&trace.algorithm), |w| {
            write_trace_csv(w, trace, s.structure)
        })?;
    }
    let initial = &traces[0].initial;
    let result = SweepResult {
        steps: s.steps,
        initial: initial.metrics.clone(),
        initial_structure: initial.structure,
        traces: traces
            .iter()
            .map(|t| SweepEntry {
                algorithm: t.algorithm,
                file: trace_file(&t.algorithm),
                links_removed: t.schedule.removed_after(s.steps),
                final_auc: t.steps.last().map_or(t.initial.metrics.auc, |r| r.metrics.auc),
            })
            .collect(),
    };
    out.write_json(MANIFEST, &manifest("sweep", s, Some(ds.manifest(&split)), result))?;
    out.commit();
    Ok(())
}

#[derive(Serialize)]
struct BackboneSummary<'a> {
    lambda_star: f64,
    stop_step: usize,
    links_kept: usize,
    fraction_removed: f64,
    degenerate: bool,
    metrics_initial: &'a MetricReport,
    metrics_backbone: &'a MetricReport,
    structure_initial: &'a StructureReport,
    structure_backbone: &'a StructureReport,
}

fn backbone(s: &Settings) -> Result<(), CliError> {
    let dir = s.out_dir()?;
    let (ds, split) = load_evaluable(s)?;
    let config = BackboneConfig {
        lambda_grid: s.lambda_grid.clone(),
        threshold: s.threshold,
        seed: s.seed,
        steps: s.steps,
        eval: eval_config(s),
    };
    let result = extract_backbone(&ds.training, &ds.probe, &config)?;
    if result.degenerate {
        eprintln!("warning: every λ fell below the threshold at step 1; the backbone is the training graph");
    }

    let mut out = Outputs::create(dir)?;
    out.write(BACKBONE_EDGES, |w| {
        write_edge_list(w, &result.backbone, &ds.users, &ds.items)
    })?;
    out.write(LAMBDA_SELECTION, |w| write_selection_log(w, &result.selection))?;
    out.write(COMPARISON, |w| write_comparison(w, &result.comparison()))?;
    let summary = BackboneSummary {
        lambda_star: result.lambda_star,
        stop_step: result.stop_step,
        links_kept: result.backbone.num_links(),
        fraction_removed: result.fraction_removed,
        degenerate: result.degenerate,
        metrics_initial: &result.metrics_initial,
        metrics_backbone: &result.metrics_backbone,
        structure_initial: &result.structure_initial,
        structure_backbone: &result.structure_backbone,
    };
    out.write_json(MANIFEST, &manifest("backbone", s, Some(ds.manifest(&split)), summary))?;
    out.commit();
    Ok(())
}

fn stats(s: &Settings) -> Result<(), CliError> {
    let records = read_records(s)?;
    let ds = graph_from_records(&records)?;
    let report = structure_report(&ds.training);
    match &s.out {
        Some(dir) => {
            let mut out = Outputs::create(dir)?;
            out.write(STATS, |w| write_structure(w, &report))?;
            out.commit();
        }
        None => {
            let stdout = io::stdout();
            write_structure(&mut stdout.lock(), &report).map_err(|e| CliError::Data(e.to_string()))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportResult {
    at_step: usize,
    columns: Vec<String>,
}

fn report(s: &Settings) -> Result<(), CliError> {
    let dir = s.out_dir()?;
    let (ds, split) = load_evaluable(s)?;
    let eval = eval_config(s);
    let g0 = &ds.training;
    evaluate(g0, &ds.probe, &eval)?;

    let mut columns = vec![ComparisonColumn::measure("InitialData", g0, g0, &ds.probe, &eval)];
    let snapshots = s
        .algos
        .par_iter()
        .map(|&alg| {
            let mut removal = RemovalRun::new(g0.clone(), alg, s.seed, s.steps)?;
            while removal.current_step() < s.at_step {
                removal.advance();
            }
            let label = format!("{alg}^{}", s.at_step);
            Ok(ComparisonColumn::measure(label, removal.graph(), g0, &ds.probe, &eval))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    columns.extend(snapshots);

    let mut out = Outputs::create(dir)?;
    out.write(COMPARISON, |w| write_comparison(w, &columns))?;
    let result = ReportResult {
        at_step: s.at_step,
        columns: columns.iter().map(|c| c.label.clone()).collect(),
    };
    out.write_json(MANIFEST, &manifest("report", s, Some(ds.manifest(&split)), result))?;
    out.commit();
    Ok(())
}
