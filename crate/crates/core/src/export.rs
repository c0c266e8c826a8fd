//! Delimiter-separated outputs: macro-step traces, edge lists, λ selection
//! logs and comparison tables. Undefined values are written as `NA`.

use std::io::{self, Write};

use crate::backbone::{ComparisonColumn, LambdaOutcome};
use crate::graph::BipartiteGraph;
use crate::ingest::IdMap;
use crate::removal::{RemovalTrace, StepRecord};
use crate::structure::StructureReport;

pub const TRACE_HEADER: &str = "step,links_remaining,auc,precision,hamming";
pub const TRACE_STRUCTURE_HEADER: &str = ",c4_user,c4_item,c4_net,r,h_user,h_item,dr";

pub fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.6}"),
        None => "NA".to_string(),
    }
}

fn structure_fields(s: Option<&StructureReport>) -> [Option<f64>; 7] {
    match s {
        Some(s) => [
            s.c4_user,
            s.c4_item,
            s.c4_net,
            s.assortativity,
            s.h_user,
            s.h_item,
            s.diffusion_range,
        ],
        None => [None; 7],
    }
}

fn write_step<W: Write>(out: &mut W, step: &StepRecord, structure: bool) -> io::Result<()> {
    write!(
        out,
        "{},{},{},{},{}",
        step.step,
        step.links_remaining,
        fmt_value(Some(step.metrics.auc)),
        fmt_value(Some(step.metrics.precision)),
        fmt_value(step.metrics.hamming)
    )?;
    if structure {
        for v in structure_fields(step.structure.as_ref()) {
            write!(out, ",{}", fmt_value(v))?;
        }
    }
    writeln!(out)
}

/// One row per macro-step (1..=steps). The step-0 state is not a row.
pub fn write_trace_csv<W: Write>(out: &mut W, trace: &RemovalTrace, structure: bool) -> io::Result<()> {
    write!(out, "{TRACE_HEADER}")?;
    if structure {
        write!(out, "{TRACE_STRUCTURE_HEADER}")?;
    }
    writeln!(out)?;
    for step in &trace.steps {
        write_step(out, step, structure)?;
    }
    Ok(())
}

/// `user_raw_id item_raw_id timestamp` per live link, in link id order.
pub fn write_edge_list<W: Write>(out: &mut W, g: &BipartiteGraph, users: &IdMap, items: &IdMap) -> io::Result<()> {
    for link in g.links() {
        writeln!(
            out,
            "{} {} {}",
            users.raw(link.user),
            items.raw(link.item),
            link.timestamp
        )?;
    }
    Ok(())
}

pub fn write_selection_log<W: Write>(out: &mut W, selection: &[LambdaOutcome]) -> io::Result<()> {
    writeln!(out, "lambda,stop_step,removed_links,auc,precision,hamming")?;
    for o in selection {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            o.lambda,
            o.stop_step,
            o.removed_links,
            fmt_value(Some(o.auc)),
            fmt_value(Some(o.precision)),
            fmt_value(o.hamming)
        )?;
    }
    Ok(())
}

/// A `metric,<column>...` table with the ten comparison rows.
pub fn write_comparison<W: Write>(out: &mut W, columns: &[ComparisonColumn]) -> io::Result<()> {
    write!(out, "metric")?;
    for c in columns {
        write!(out, ",{}", c.label)?;
    }
    writeln!(out)?;
    let rows: Vec<_> = columns.iter().map(ComparisonColumn::rows).collect();
    for r in 0..crate::backbone::COMPARISON_ROWS.len() {
        write!(out, "{}", crate::backbone::COMPARISON_ROWS[r])?;
        for col in &rows {
            write!(out, ",{}", fmt_value(col[r].1))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// `field,value` lines for a single structure report.
pub fn write_structure<W: Write>(out: &mut W, report: &StructureReport) -> io::Result<()> {
    writeln!(out, "field,value")?;
    let names = ["c4_user", "c4_item", "c4_net", "r", "h_user", "h_item", "dr"];
    for (name, v) in names.iter().zip(structure_fields(Some(report))) {
        writeln!(out, "{name},{}", fmt_value(v))?;
    }
    Ok(())
}
