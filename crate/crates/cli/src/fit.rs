//! Finite-size scaling fits over sweep tables.
//!
//! ```toml
//! sweep = "kitaev_bmap.toml"   # or: table = "out/fq_nonlocal.tsv"
//! observable = "fq_nonlocal"
//! x = "size"
//! law = "power"                # power | power_offset | exponential | semilog
//! subtract = 1.0               # fit (value - 1)
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use qcrit_core::thermal::{
    fit_exponential, fit_power_law, fit_power_law_with_offset, linear_regression, FitResult, MIN_FIT_SAMPLES,
};
use qcrit_core::QcritError;

use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::sweep::{output_dir, run_sweep, SweepOptions, VERSION};
use crate::table::{format_float, parse_float, sanitize, Table};

/// Fits whose residual RMS exceeds this fraction of the mean |y| are flagged.
pub const POOR_FIT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// `y = a x^b`.
    Power,
    /// `y = c + a x^b`.
    PowerOffset,
    /// `y = a e^{−x/x₀}`.
    Exponential,
    /// `y = a + b ln x`.
    Semilog,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub table: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
    pub observable: Option<String>,
    #[serde(default = "default_x")]
    pub x: String,
    #[serde(default = "default_y")]
    pub y: String,
    pub law: Law,
    #[serde(default)]
    pub subtract: f64,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    /// Offset search interval for `power_offset`.
    pub offset_bounds: Option<(f64, f64)>,
    pub output: Option<PathBuf>,
}

fn default_x() -> String {
    "size".into()
}

fn default_y() -> String {
    "value".into()
}

#[derive(Debug, Clone)]
pub struct FitSummary {
    pub output: PathBuf,
    pub groups: usize,
    pub flagged: usize,
    pub failed: usize,
}

const NON_GROUP_COLUMNS: [&str; 2] = ["status", "info"];

fn relative(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() { p.to_path_buf() } else { base.parent().unwrap_or(Path::new(".")).join(p) }
}

/// Loads the table the fit reads, running the sweep first when its table is
/// missing.
fn locate_table(cfg: &FitConfig, path: &Path, opts: &SweepOptions) -> Result<PathBuf> {
    let label = path.display().to_string();
    match (&cfg.table, &cfg.sweep) {
        (Some(t), None) => Ok(relative(path, t)),
        (None, Some(s)) => {
            let sweep_path = relative(path, s);
            let sweep = SweepConfig::load(&sweep_path)?;
            let observable = cfg
                .observable
                .clone()
                .or_else(|| (sweep.observables.len() == 1).then(|| sweep.observables[0].clone()))
                .ok_or_else(|| CliError::config(&label, "observable: required when the sweep has several"))?;
            if !sweep.observables.contains(&observable) {
                return Err(CliError::config(
                    &label,
                    format!("observable: '{observable}' is not produced by {}", sweep_path.display()),
                ));
            }
            let table = output_dir(&sweep, &sweep_path, opts).join(format!("{observable}.tsv"));
            if !table.exists() {
                run_sweep(&sweep, &sweep_path, opts)?;
            }
            Ok(table)
        }
        _ => Err(CliError::config(&label, "give exactly one of 'table' or 'sweep'")),
    }
}

fn fit_group(law: Law, xs: &[f64], ys: &[f64], bounds: Option<(f64, f64)>) -> qcrit_core::Result<FitResult> {
    match law {
        Law::Power => fit_power_law(xs, ys),
        Law::Exponential => fit_exponential(xs, ys),
        Law::PowerOffset => {
            let bounds = bounds.ok_or_else(|| QcritError::Validation("power_offset needs offset_bounds".into()))?;
            fit_power_law_with_offset(xs, ys, bounds)
        }
        Law::Semilog => {
            if xs.len() < MIN_FIT_SAMPLES {
                return Err(QcritError::InsufficientData(format!("need {MIN_FIT_SAMPLES} samples, got {}", xs.len())));
            }
            if xs.iter().any(|&x| x <= 0.0) {
                return Err(QcritError::Validation("semilog fits need positive x".into()));
            }
            let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let lin = linear_regression(&lx, ys)?;
            let range = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            Ok(FitResult {
                model: qcrit_core::thermal::FitModel::Power,
                prefactor: lin.intercept,
                prefactor_sigma: lin.intercept_sigma,
                exponent: lin.slope,
                exponent_sigma: lin.slope_sigma,
                offset: 0.0,
                rms: lin.rms,
                r_squared: lin.r_squared,
                x_range: range,
            })
        }
    }
}

/// Fits every parameter point of a sweep table and writes the fit table.
pub fn scaling_report(path: &Path, opts: &SweepOptions) -> Result<FitSummary> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let cfg: FitConfig = toml::from_str(&text).map_err(|e| CliError::config(&label, e.to_string()))?;
    let table_path = locate_table(&cfg, path, opts)?;
    let table = Table::read(&table_path)?;
    let bad_column = |m: String| CliError::config(&label, m);
    let xi = table.column(&cfg.x).map_err(bad_column)?;
    let yi = table.column(&cfg.y).map_err(bad_column)?;
    let status = table.column("status").ok();
    let group_cols: Vec<usize> = (0..table.columns.len())
        .filter(|&c| c != xi && c != yi && !NON_GROUP_COLUMNS.contains(&table.columns[c].as_str()))
        .collect();

    let mut groups: BTreeMap<Vec<String>, (usize, Vec<(f64, f64)>)> = BTreeMap::new();
    let mut skipped = 0usize;
    for (r, row) in table.rows.iter().enumerate() {
        let key: Vec<String> = group_cols.iter().map(|&c| row[c].clone()).collect();
        let entry = groups.entry(key).or_insert((r, Vec::new()));
        let ok = status.is_none_or(|s| row[s] == "ok");
        let (x, y) = (parse_float(&row[xi]), parse_float(&row[yi]));
        match (ok, x, y) {
            (true, Some(x), Some(y)) if x.is_finite() && y.is_finite() => {
                let inside = cfg.x_min.is_none_or(|lo| x >= lo) && cfg.x_max.is_none_or(|hi| x <= hi);
                if inside {
                    entry.1.push((x, y - cfg.subtract));
                }
            }
            _ => skipped += 1,
        }
    }
    let mut ordered: Vec<(Vec<String>, (usize, Vec<(f64, f64)>))> = groups.into_iter().collect();
    ordered.sort_by_key(|(_, (first, _))| *first);

    let mut columns: Vec<String> = group_cols.iter().map(|&c| table.columns[c].clone()).collect();
    columns.extend(
        [
            "samples", "prefactor", "prefactor_sigma", "exponent", "exponent_sigma", "offset", "rms", "relative_rms",
            "r_squared", "flag",
        ]
        .map(String::from),
    );
    let mut out = Table::new(columns);
    out.meta("tool", format!("qcrit {VERSION}"));
    out.meta("source", table_path.display().to_string());
    out.meta("law", format!("{:?}", cfg.law).to_lowercase());
    out.meta("x", &cfg.x);
    out.meta("y", format!("{} - {}", cfg.y, format_float(cfg.subtract)));
    out.meta("poor_fit", format!("relative rms > {POOR_FIT_THRESHOLD}"));
    if skipped > 0 {
        out.meta("skipped_rows", skipped.to_string());
    }

    let (mut flagged, mut failed) = (0, 0);
    for (key, (_, mut points)) in ordered.iter().cloned() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let mut row = key;
        row.push(xs.len().to_string());
        match fit_group(cfg.law, &xs, &ys, cfg.offset_bounds) {
            Ok(fit) => {
                let rel = fit.relative_rms(&ys);
                let poor = !(rel <= POOR_FIT_THRESHOLD);
                flagged += usize::from(poor);
                for v in [fit.prefactor, fit.prefactor_sigma, fit.exponent, fit.exponent_sigma, fit.offset, fit.rms, rel, fit.r_squared] {
                    row.push(format_float(v));
                }
                row.push(if poor { "poor_fit".into() } else { "ok".into() });
            }
            Err(e) => {
                failed += 1;
                row.extend(std::iter::repeat_n("nan".to_string(), 8));
                row.push(sanitize(&format!("failed: {e}")));
            }
        }
        out.rows.push(row);
    }

    let output = match &cfg.output {
        Some(p) => relative(path, p),
        None => {
            let stem = table_path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
            table_path.with_file_name(format!("{stem}.fit.tsv"))
        }
    };
    std::fs::write(&output, out.render()).map_err(|source| CliError::Write { path: output.clone(), source })?;
    Ok(FitSummary { output, groups: out.rows.len(), flagged, failed })
}
