//! Plot scripts written next to sweep tables.
//!
//! The scripts use only Python, NumPy and Matplotlib and read the table
//! they sit beside.
//!
//! ```toml
//! table = "out/fq_optimal.tsv"
//! kind = "heatmap"   # heatmap | lines
//! x = "theta"
//! y = "alpha"        # heatmap only
//! value = "value"
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Heatmap,
    Lines,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub table: PathBuf,
    pub kind: PlotKind,
    pub x: String,
    pub y: Option<String>,
    #[serde(default = "default_value")]
    pub value: String,
    /// Column whose distinct values become the legend of a line family.
    #[serde(default = "default_series")]
    pub series: String,
    #[serde(default)]
    pub logx: bool,
    #[serde(default)]
    pub logy: bool,
    pub title: Option<String>,
    pub output: Option<PathBuf>,
}

fn default_value() -> String {
    "value".into()
}

fn default_series() -> String {
    "size".into()
}

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

fn py_bool(b: bool) -> &'static str {
    if b { "True" } else { "False" }
}

const PRELUDE: &str = r##"import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name):
    with open(os.path.join(HERE, name)) as fh:
        lines = [line for line in fh if line.strip() and not line.startswith("#")]
    rows = list(csv.DictReader(lines, delimiter="\t"))
    return [r for r in rows if r.get("status", "ok") == "ok"]

"##;

fn heatmap_body(spec: &PlotSpec) -> String {
    format!(
        r#"rows = load(TABLE)
xs = sorted({{float(r[X]) for r in rows}})
ys = sorted({{float(r[Y]) for r in rows}})
grid = np.full((len(ys), len(xs)), np.nan)
for r in rows:
    grid[ys.index(float(r[Y])), xs.index(float(r[X]))] = float(r[VALUE])
fig, ax = plt.subplots()
mesh = ax.pcolormesh(xs, ys, grid, shading="nearest")
fig.colorbar(mesh, ax=ax, label=VALUE)
ax.set_xlabel(X)
ax.set_ylabel(Y)
if {logx}:
    ax.set_xscale("log")
if {logy}:
    ax.set_yscale("log")
"#,
        logx = py_bool(spec.logx),
        logy = py_bool(spec.logy),
    )
}

fn lines_body(spec: &PlotSpec) -> String {
    format!(
        r#"rows = load(TABLE)
groups = {{}}
for r in rows:
    groups.setdefault(r[SERIES], []).append((float(r[X]), float(r[VALUE])))
fig, ax = plt.subplots()
for key in sorted(groups, key=float):
    pts = sorted(groups[key])
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{{SERIES}} = {{key}}")
ax.legend()
ax.set_xlabel(X)
ax.set_ylabel(VALUE)
if {logx}:
    ax.set_xscale("log")
if {logy}:
    ax.set_yscale("log")
"#,
        logx = py_bool(spec.logx),
        logy = py_bool(spec.logy),
    )
}

/// Writes the plotting script for `spec` and returns its path.
pub fn plot_emit(path: &Path) -> Result<PathBuf> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let spec: PlotSpec = toml::from_str(&text).map_err(|e| CliError::config(&label, e.to_string()))?;
    let table_path = if spec.table.is_absolute() {
        spec.table.clone()
    } else {
        path.parent().unwrap_or(Path::new(".")).join(&spec.table)
    };
    let table = Table::read(&table_path)?;

    let mut needed = vec![spec.x.as_str(), spec.value.as_str()];
    match (spec.kind, &spec.y) {
        (PlotKind::Heatmap, Some(y)) => needed.push(y),
        (PlotKind::Heatmap, None) => return Err(CliError::config(&label, "y: required for heatmaps")),
        (PlotKind::Lines, _) => needed.push(&spec.series),
    }
    for column in needed {
        table.column(column).map_err(|m| CliError::config(&label, m))?;
    }
    if spec.kind == PlotKind::Heatmap {
        let y = spec.y.as_deref().unwrap_or_default();
        let (xi, yi) = (table.column(&spec.x).unwrap_or(0), table.column(y).unwrap_or(0));
        let mut seen = BTreeSet::new();
        if let Some(row) = table.rows.iter().find(|r| !seen.insert((r[xi].clone(), r[yi].clone()))) {
            return Err(CliError::config(
                &label,
                format!("several rows share {} = {}, {y} = {}; filter the table or use a line plot", spec.x, row[xi], row[yi]),
            ));
        }
    }

    let table_name = table_path.file_name().and_then(|s| s.to_str()).unwrap_or("table.tsv").to_string();
    let stem = table_path.file_stem().and_then(|s| s.to_str()).unwrap_or("table").to_string();
    let kind = if spec.kind == PlotKind::Heatmap { "heatmap" } else { "lines" };
    let script = match &spec.output {
        Some(p) => table_path.with_file_name(p),
        None => table_path.with_file_name(format!("{stem}.{kind}.py")),
    };
    let image = format!("{}.png", script.file_stem().and_then(|s| s.to_str()).unwrap_or(&stem));
    let title = spec.title.clone().unwrap_or_else(|| table.metadata_value("observable").unwrap_or(&stem).to_string());

    let mut body = format!(
        "#!/usr/bin/env python3\n\"\"\"Plot of {table_name}, written by qcrit.\"\"\"\n{PRELUDE}TABLE = {}\nX = {}\nVALUE = {}\nSERIES = {}\n\n",
        py_str(&table_name),
        py_str(&spec.x),
        py_str(&spec.value),
        py_str(&spec.series),
    );
    body.push_str(&match (spec.kind, &spec.y) {
        (PlotKind::Heatmap, Some(y)) => format!("Y = {}\n{}", py_str(y), heatmap_body(&spec)),
        _ => lines_body(&spec),
    });
    body.push_str(&format!(
        "ax.set_title({})\nfig.tight_layout()\nout = os.path.join(HERE, {})\nfig.savefig(out, dpi=150)\nprint(out, file=sys.stderr)\n",
        py_str(&title),
        py_str(&image),
    ));
    std::fs::write(&script, body).map_err(|source| CliError::Write { path: script.clone(), source })?;
    Ok(script)
}
