//! Parallel parameter sweeps.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::cache::{cache_key, sha256_hex, Cache, Spectrum};
use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::manifest::{self, json_number, Manifest, PointRecord, PointStatus, RunState};
use crate::models::{ModelPoint, SpectrumKind, Value};
use crate::table::{format_float, sanitize, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CACHE_DIR: &str = "cache";

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    pub use_cache: bool,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub out_dir: PathBuf,
    pub tables: Vec<PathBuf>,
    pub points: usize,
    pub failed_points: usize,
    pub cache_hits: usize,
}

struct Job {
    index: usize,
    swept: Vec<f64>,
    point: ModelPoint,
}

type Cell = std::result::Result<Value, String>;

struct Outcome {
    index: usize,
    cache_hit: bool,
    /// Freshly computed spectra to store, by key.
    fresh: Vec<(String, Spectrum)>,
    /// Keys and checksums of spectra reused from the cache.
    reused: Vec<(String, String)>,
    /// Per observable: one cell, or one per temperature.
    cells: Vec<Vec<Cell>>,
    errors: Vec<String>,
}

/// Output directory of `cfg` loaded from `config_path`: relative paths
/// resolve against the configuration file.
pub fn output_dir(cfg: &SweepConfig, config_path: &Path, opts: &SweepOptions) -> PathBuf {
    match &opts.out {
        Some(dir) => dir.clone(),
        None if cfg.output.is_absolute() => cfg.output.clone(),
        None => config_path.parent().unwrap_or(Path::new(".")).join(&cfg.output),
    }
}

fn jobs(cfg: &SweepConfig) -> Vec<Job> {
    let axes: Vec<Vec<f64>> = cfg.axes.iter().map(|a| a.grid.values()).collect();
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for values in &axes {
        combos = combos.iter().flat_map(|c| values.iter().map(move |v| [c.as_slice(), &[*v]].concat())).collect();
    }
    let mut out = Vec::new();
    for swept in combos {
        for &size in &cfg.sizes {
            let point = ModelPoint { model: cfg.model, params: cfg.parameters(&swept), size };
            out.push(Job { index: out.len(), swept: swept.clone(), point });
        }
    }
    out
}

fn compute(
    job: &Job,
    kinds: &[SpectrumKind],
    observables: &[String],
    thermal: &[bool],
    temperatures: &[f64],
    cache: Option<&Cache>,
) -> Outcome {
    let mut outcome = Outcome {
        index: job.index,
        cache_hit: !kinds.is_empty(),
        fresh: Vec::new(),
        reused: Vec::new(),
        cells: Vec::new(),
        errors: Vec::new(),
    };
    let mut spectra = Vec::new();
    let mut missing: Vec<(SpectrumKind, String)> = Vec::new();
    for &kind in kinds {
        let key = cache_key(&job.point, kind, VERSION);
        match cache.and_then(|c| c.load(&key)) {
            Some((s, sum)) => {
                outcome.reused.push((key, sum));
                spectra.push((kind, s));
            }
            None => {
                outcome.cache_hit = false;
                match job.point.spectrum(kind) {
                    Ok(s) => {
                        outcome.fresh.push((key, s.clone()));
                        spectra.push((kind, s));
                    }
                    Err(e) => missing.push((kind, e.to_string())),
                }
            }
        }
    }
    for (m, name) in observables.iter().enumerate() {
        let temps: Vec<Option<f64>> =
            if thermal[m] { temperatures.iter().map(|&t| Some(t)).collect() } else { vec![None] };
        let row: Vec<Cell> = temps
            .into_iter()
            .map(|t| {
                job.point.evaluate(name, &spectra, t).map_err(|e| match missing.first() {
                    Some((kind, why)) => format!("{} spectrum failed: {why}", kind.tag()),
                    None => e.to_string(),
                })
            })
            .collect();
        for cell in &row {
            if let Err(e) = cell {
                let msg = format!("{name}: {e}");
                if !outcome.errors.contains(&msg) {
                    outcome.errors.push(msg);
                }
            }
        }
        outcome.cells.push(row);
    }
    outcome
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn point_record(job: &Job, status: PointStatus, cache_hit: bool, errors: Vec<String>) -> PointRecord {
    PointRecord {
        index: job.index,
        params: job.point.params.iter().map(|(k, v)| (k.clone(), json_number(*v))).collect(),
        size: job.point.size,
        status,
        cache_hit,
        errors,
    }
}

fn describe_parameters(cfg: &SweepConfig) -> String {
    let swept: Vec<&str> = cfg.axes.iter().map(|a| a.name.as_str()).collect();
    cfg.parameters(&[])
        .iter()
        .filter(|(k, _)| !swept.contains(&k.as_str()))
        .map(|(k, v)| format!("{k}={}", format_float(*v)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn build_table(cfg: &SweepConfig, observable: &str, thermal: bool, jobs: &[Job], cells: &[&Vec<Cell>]) -> Table {
    let mut columns: Vec<String> = cfg.axes.iter().map(|a| a.name.clone()).collect();
    columns.push("size".into());
    if thermal {
        columns.push("T".into());
    }
    columns.extend(["value", "status", "info"].map(String::from));
    let mut table = Table::new(columns);
    let spec = cfg.model.observable(observable).expect("observable validated");
    table.meta("tool", format!("qcrit {VERSION}"));
    table.meta("model", cfg.model.name());
    table.meta("observable", format!("{observable} ({})", spec.summary));
    table.meta("parameters", describe_parameters(cfg));
    for a in &cfg.axes {
        let g = &a.grid;
        table.meta(
            "axis",
            format!("{} {} {} {} {:?}", a.name, format_float(g.min), format_float(g.max), g.count, g.spacing).to_lowercase(),
        );
    }
    if let (true, Some(t)) = (thermal, &cfg.temperature) {
        table.meta(
            "temperature",
            format!("{} {} {} {:?}", format_float(t.min), format_float(t.max), t.count, t.spacing).to_lowercase(),
        );
    }
    let temps = cfg.temperature.as_ref().map(|t| t.values()).unwrap_or_default();
    for (job, row) in jobs.iter().zip(cells) {
        for (k, cell) in row.iter().enumerate() {
            let mut line: Vec<String> = job.swept.iter().map(|v| format_float(*v)).collect();
            line.push(job.point.size.to_string());
            if thermal {
                line.push(format_float(temps[k]));
            }
            match cell {
                Ok(v) => {
                    line.push(format_float(v.value));
                    line.push("ok".into());
                    line.push(if v.info.is_empty() { "-".into() } else { sanitize(&v.info) });
                }
                Err(e) => {
                    line.push("nan".into());
                    line.push("failed".into());
                    line.push(sanitize(e));
                }
            }
            table.rows.push(line);
        }
    }
    table
}

/// Runs every grid point, writes one table per observable plus the manifest.
pub fn run_sweep(cfg: &SweepConfig, config_path: &Path, opts: &SweepOptions) -> Result<SweepSummary> {
    let start = Instant::now();
    let out_dir = output_dir(cfg, config_path, opts);
    std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Write { path: out_dir.clone(), source })?;

    let previous = if opts.use_cache { manifest::Manifest::read(&out_dir) } else { None };
    let trusted = previous.map(|m| m.cache).unwrap_or_default();
    let cache = opts.use_cache.then(|| Cache::new(out_dir.join(CACHE_DIR), trusted));

    let jobs = jobs(cfg);
    let temperatures = cfg.temperature.as_ref().map(|t| t.values()).unwrap_or_default();
    let t_max = temperatures.iter().copied().reduce(f64::max);
    let kinds = SpectrumKind::required(cfg.model, &cfg.observables, t_max);
    let thermal: Vec<bool> = cfg.observables.iter().map(|o| cfg.model.observable(o).is_some_and(|s| s.thermal)).collect();

    let mut manifest = Manifest {
        tool: "qcrit".into(),
        version: VERSION.into(),
        state: RunState::Running,
        config_path: config_path.display().to_string(),
        config: cfg.source.clone(),
        model: cfg.model.name().into(),
        cache_enabled: opts.use_cache,
        wall_time_seconds: 0.0,
        cache_hits: 0,
        points: jobs.iter().map(|j| point_record(j, PointStatus::Pending, false, Vec::new())).collect(),
        tables: BTreeMap::new(),
        cache: BTreeMap::new(),
    };
    manifest.write(&out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))?;
    let mut outcomes: Vec<Option<Outcome>> = (0..jobs.len()).map(|_| None).collect();
    let mut store_error = None;
    let (tx, rx) = mpsc::channel::<Outcome>();
    std::thread::scope(|scope| {
        let (jobs, kinds, thermal, temperatures, cache) = (&jobs, &kinds, &thermal, &temperatures, cache.as_ref());
        scope.spawn(move || {
            pool.install(|| {
                jobs.par_iter().for_each_with(tx, |tx, job| {
                    let run = || compute(job, kinds, &cfg.observables, thermal, temperatures, cache);
                    let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|payload| {
                        let msg = format!("internal panic: {}", panic_message(payload));
                        Outcome {
                            index: job.index,
                            cache_hit: false,
                            fresh: Vec::new(),
                            reused: Vec::new(),
                            cells: thermal
                                .iter()
                                .map(|&th| vec![Err(msg.clone()); if th { temperatures.len() } else { 1 }])
                                .collect(),
                            errors: vec![msg],
                        }
                    });
                    let _ = tx.send(outcome);
                })
            })
        });
        for mut outcome in rx {
            if let Some(cache) = cache {
                for (key, spectrum) in std::mem::take(&mut outcome.fresh) {
                    match cache.store(&key, &spectrum) {
                        Ok(sum) => {
                            manifest.cache.insert(key, sum);
                        }
                        Err(source) => store_error = Some(CliError::Write { path: cache.dir().join(&key), source }),
                    }
                }
                manifest.cache.extend(outcome.reused.iter().cloned());
            }
            let index = outcome.index;
            outcomes[index] = Some(outcome);
        }
    });
    if let Some(e) = store_error {
        return Err(e);
    }
    let outcomes: Vec<Outcome> = outcomes
        .into_iter()
        .map(|o| o.ok_or_else(|| CliError::Internal("a grid point produced no result".into())))
        .collect::<Result<_>>()?;

    let mut tables = Vec::new();
    for (m, observable) in cfg.observables.iter().enumerate() {
        let cells: Vec<&Vec<Cell>> = outcomes.iter().map(|o| &o.cells[m]).collect();
        let table = build_table(cfg, observable, thermal[m], &jobs, &cells);
        let name = format!("{observable}.tsv");
        let path = out_dir.join(&name);
        let text = table.render();
        std::fs::write(&path, &text).map_err(|source| CliError::Write { path: path.clone(), source })?;
        manifest.tables.insert(name, sha256_hex(text.as_bytes()));
        tables.push(path);
    }

    let mut failed_points = 0;
    for (job, outcome) in jobs.iter().zip(outcomes) {
        let status = if outcome.errors.is_empty() { PointStatus::Ok } else { PointStatus::Failed };
        failed_points += usize::from(status == PointStatus::Failed);
        manifest.cache_hits += usize::from(outcome.cache_hit);
        manifest.points[job.index] = point_record(job, status, outcome.cache_hit, outcome.errors);
    }
    manifest.state = RunState::Complete;
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.write(&out_dir)?;

    Ok(SweepSummary { out_dir, tables, points: jobs.len(), failed_points, cache_hits: manifest.cache_hits })
}
