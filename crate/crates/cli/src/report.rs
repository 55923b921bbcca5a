//! Comparison of analytic bounds and numerical estimates across runs.
//!
//! Records with the same config hash form one row. Rows whose grid differs
//! from the first row's are flagged, not dropped.

use std::path::{Path, PathBuf};

use attractor_core::tangent::DimensionOutcome;
use attractor_core::Grid;

use anyhow::Context;
use serde::Deserialize;

use crate::plot::{line_chart, Series};
use crate::record::{write_csv, Status};

/// The parts of a `run.json` the comparison needs. Reading only these keeps
/// records with non-finite values (written as `null`) loadable.
#[derive(Debug, Clone, Deserialize)]
pub struct RecordView {
    pub command: String,
    pub label: String,
    pub config_hash: String,
    pub status: Status,
    pub error: Option<String>,
    pub grid: Grid,
    pub outputs: OutputsView,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct OutputsView {
    pub bound: Option<BoundView>,
    pub dimension: Option<DimensionView>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BoundView {
    pub d_final: u64,
    pub n_count: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DimensionView {
    pub outcome: DimensionOutcome,
}

impl RecordView {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub config_hash: String,
    pub grid: Grid,
    pub commands: Vec<String>,
    pub d_final: Option<u64>,
    pub n_count: Option<usize>,
    /// Certified dimension, when a dimension estimate was recorded.
    pub estimate: Option<DimensionOutcome>,
    pub flags: Vec<String>,
}

fn grid_text(g: &Grid) -> String {
    let p = g.points();
    format!("{}x{}x{}", p[0], p[1], p[2])
}

pub fn build_rows(records: &[RecordView]) -> Vec<Row> {
    let mut rows: Vec<Row> = Vec::new();
    for r in records {
        let i = match rows.iter().position(|row| row.config_hash == r.config_hash) {
            Some(i) => i,
            None => {
                rows.push(Row {
                    label: r.label.clone(),
                    config_hash: r.config_hash.clone(),
                    grid: r.grid,
                    commands: vec![],
                    d_final: None,
                    n_count: None,
                    estimate: None,
                    flags: vec![],
                });
                rows.len() - 1
            }
        };
        let row = &mut rows[i];
        row.commands.push(r.command.clone());
        if let Some(b) = &r.outputs.bound {
            row.d_final = Some(b.d_final);
            row.n_count = Some(b.n_count);
        }
        if let Some(d) = &r.outputs.dimension {
            row.estimate = Some(d.outcome);
        }
        if r.error.is_some() {
            row.flags.push(format!("{} failed: {:?}", r.command, r.status));
        }
    }
    if let Some(reference) = rows.first().map(|r| r.grid) {
        for row in &mut rows {
            if !row.grid.compatible(&reference, 1e-12) {
                row.flags.push(format!(
                    "incompatible grid {} (reference {})",
                    grid_text(&row.grid),
                    grid_text(&reference)
                ));
            }
        }
    }
    rows
}

fn estimate_text(e: Option<DimensionOutcome>) -> String {
    match e {
        None => String::new(),
        Some(DimensionOutcome::Certified { d }) => d.to_string(),
        Some(DimensionOutcome::Inconclusive { d_max }) => format!("inconclusive (d_max {d_max})"),
    }
}

pub const HEADER: [&str; 8] = [
    "label",
    "config_hash",
    "grid",
    "commands",
    "d_final",
    "n_count",
    "estimate",
    "flags",
];

pub fn table(rows: &[Row]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.config_hash.chars().take(12).collect(),
                grid_text(&r.grid),
                r.commands.join(" "),
                r.d_final.map(|d| d.to_string()).unwrap_or_default(),
                r.n_count.map(|d| d.to_string()).unwrap_or_default(),
                estimate_text(r.estimate),
                r.flags.join("; "),
            ]
        })
        .collect()
}

pub fn render_text(cells: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for row in cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |row: Vec<&str>| {
        row.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(HEADER.to_vec());
    out.push('\n');
    for row in cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// Writes `report.csv` and `bound_vs_estimate.svg`; returns the text table.
pub fn write_report(paths: &[PathBuf], out: &Path) -> anyhow::Result<String> {
    let records = paths.iter().map(|p| RecordView::load(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let rows = build_rows(&records);
    let cells = table(&rows);
    std::fs::create_dir_all(out)?;
    write_csv(&out.join("report.csv"), &HEADER, &cells)?;

    let point = |i: usize, v: Option<f64>| v.map(|v| (i as f64 + 1.0, v));
    let bound = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| point(i, r.d_final.map(|d| d as f64)))
        .collect();
    let estimate = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| match r.estimate {
            Some(DimensionOutcome::Certified { d }) => point(i, Some(d as f64)),
            _ => None,
        })
        .collect();
    let svg = line_chart(
        "Analytic bound and numerical estimate",
        "row",
        "dimension",
        &[
            Series {
                name: "d_final".into(),
                points: bound,
            },
            Series {
                name: "estimate".into(),
                points: estimate,
            },
        ],
    );
    std::fs::write(out.join("bound_vs_estimate.svg"), svg)?;
    Ok(render_text(&cells))
}
