//! Sweep configuration files.
//!
//! ```toml
//! model = "kitaev"
//! observables = ["fq_nonlocal", "gap"]
//! sizes = [64, 128, 256]
//! output = "out/kitaev"
//!
//! [fixed]
//! pairing = 1.0
//!
//! [[axes]]
//! name = "mu"
//! min = -2.0
//! max = 2.0
//! count = 41
//!
//! [[axes]]
//! name = "alpha"
//! min = 0.1
//! max = 10.0
//! count = 21
//! spacing = "log"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{CliError, Result};
use crate::models::ModelKind;

pub const MAX_SWEPT_AXES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Sample points `min..=max` with the given spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * s,
                    Spacing::Log => self.min * (self.max / self.min).powf(s),
                }
            })
            .collect()
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err("bounds must be finite".into());
        }
        match self.count {
            0 => return Err("count must be at least 2, or 1 with min = max".into()),
            1 if self.min != self.max => {
                return Err(format!("count = 1 requires min = max, got [{}, {}]", self.min, self.max))
            }
            1 => {}
            _ if self.min >= self.max => return Err(format!("need min < max, got [{}, {}]", self.min, self.max)),
            _ => {}
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err("log spacing needs positive bounds".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweptAxis {
    pub name: String,
    pub grid: Grid,
}

/// A validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub fixed: BTreeMap<String, f64>,
    pub axes: Vec<SweptAxis>,
    pub observables: Vec<String>,
    pub sizes: Vec<usize>,
    pub temperature: Option<Grid>,
    pub output: PathBuf,
    /// The file as written, echoed into manifests.
    pub source: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn get(&self) -> f64 {
        match *self {
            Number::Int(i) => i as f64,
            Number::Float(x) => x,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    name: Spanned<String>,
    min: Number,
    max: Number,
    count: i64,
    #[serde(default = "linear")]
    spacing: Spacing,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemperature {
    min: Number,
    max: Number,
    count: i64,
    #[serde(default = "linear")]
    spacing: Spacing,
}

fn linear() -> Spacing {
    Spacing::Linear
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Spanned<String>,
    #[serde(default)]
    fixed: BTreeMap<Spanned<String>, Number>,
    axes: Option<Spanned<Vec<Spanned<RawAxis>>>>,
    observables: Spanned<Vec<Spanned<String>>>,
    sizes: Spanned<Vec<Spanned<i64>>>,
    temperature: Option<Spanned<RawTemperature>>,
    output: Option<String>,
}

struct Locator<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Locator<'_> {
    fn error(&self, span: std::ops::Range<usize>, field: impl Into<String>, message: impl Into<String>) -> CliError {
        let line = self.text[..span.start.min(self.text.len())].matches('\n').count() + 1;
        CliError::Field { path: self.path.to_path_buf(), line, field: field.into(), message: message.into() }
    }
}

fn grid(count: i64, min: &Number, max: &Number, spacing: Spacing) -> std::result::Result<Grid, String> {
    let count = usize::try_from(count).map_err(|_| format!("count must be positive, got {count}"))?;
    let g = Grid { min: min.get(), max: max.get(), count, spacing };
    g.check()?;
    Ok(g)
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    /// Parses and validates `text`; `path` only labels diagnostics.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let loc = Locator { path, text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| match e.span() {
            Some(span) => loc.error(span, "syntax", e.message().to_string()),
            None => CliError::config(path.display().to_string(), e.message().to_string()),
        })?;

        let model: ModelKind = raw.model.get_ref().parse().map_err(|m: String| loc.error(raw.model.span(), "model", m))?;
        let schema = model.params();
        let known = || schema.iter().map(|p| p.name).collect::<Vec<_>>().join(", ");

        let mut fixed = BTreeMap::new();
        for (key, value) in &raw.fixed {
            let name = key.get_ref();
            if !schema.iter().any(|p| p.name == name) {
                return Err(loc.error(
                    key.span(),
                    format!("fixed.{name}"),
                    format!("unknown parameter for model {model}; expected one of: {}", known()),
                ));
            }
            if value.get().is_nan() {
                return Err(loc.error(key.span(), format!("fixed.{name}"), "value is NaN"));
            }
            fixed.insert(name.clone(), value.get());
        }

        let raw_axes = raw.axes.as_ref().map(|a| a.get_ref().as_slice()).unwrap_or_default();
        if let Some(all) = raw.axes.as_ref().filter(|a| a.get_ref().len() > MAX_SWEPT_AXES) {
            return Err(loc.error(
                all.span(),
                "axes",
                format!("at most {MAX_SWEPT_AXES} swept axes, got {}", all.get_ref().len()),
            ));
        }
        let mut axes: Vec<SweptAxis> = Vec::new();
        for (i, spanned) in raw_axes.iter().enumerate() {
            let a = spanned.get_ref();
            let name = a.name.get_ref();
            let field = format!("axes[{i}].name");
            if !schema.iter().any(|p| p.name == name) {
                return Err(loc.error(
                    a.name.span(),
                    field,
                    format!("unknown parameter '{name}' for model {model}; expected one of: {}", known()),
                ));
            }
            if fixed.contains_key(name) || axes.iter().any(|b| &b.name == name) {
                return Err(loc.error(a.name.span(), field, format!("parameter '{name}' is set more than once")));
            }
            let g = grid(a.count, &a.min, &a.max, a.spacing).map_err(|m| loc.error(spanned.span(), format!("axes[{i}]"), m))?;
            axes.push(SweptAxis { name: name.clone(), grid: g });
        }

        for p in schema {
            if p.default.is_none() && !fixed.contains_key(p.name) && !axes.iter().any(|a| a.name == p.name) {
                return Err(loc.error(0..0, format!("fixed.{}", p.name), format!("required by model {model} but not given")));
            }
        }

        if raw.observables.get_ref().is_empty() {
            return Err(loc.error(raw.observables.span(), "observables", "at least one observable is required"));
        }
        let mut observables: Vec<String> = Vec::new();
        for (i, o) in raw.observables.get_ref().iter().enumerate() {
            let name = o.get_ref();
            if model.observable(name).is_none() {
                let names: Vec<&str> = model.observables().iter().map(|o| o.name).collect();
                return Err(loc.error(
                    o.span(),
                    format!("observables[{i}]"),
                    format!("unknown observable '{name}' for model {model}; expected one of: {}", names.join(", ")),
                ));
            }
            if !observables.contains(name) {
                observables.push(name.clone());
            }
        }

        let temperature = match &raw.temperature {
            Some(t) => {
                let r = t.get_ref();
                let g = grid(r.count, &r.min, &r.max, r.spacing).map_err(|m| loc.error(t.span(), "temperature", m))?;
                if g.min <= 0.0 {
                    return Err(loc.error(t.span(), "temperature", "temperatures must be positive"));
                }
                Some(g)
            }
            None => None,
        };
        if temperature.is_none() {
            if let Some(o) = raw.observables.get_ref().iter().find(|o| model.observable(o.get_ref()).is_some_and(|s| s.thermal)) {
                return Err(loc.error(o.span(), "observables", format!("'{}' needs a [temperature] axis", o.get_ref())));
            }
        }

        if raw.sizes.get_ref().is_empty() {
            return Err(loc.error(raw.sizes.span(), "sizes", "at least one size is required"));
        }
        let mut sizes = Vec::new();
        for (i, s) in raw.sizes.get_ref().iter().enumerate() {
            let n = usize::try_from(*s.get_ref())
                .map_err(|_| "sizes must be positive".to_string())
                .and_then(|n| model.check_size(n).map(|_| n))
                .map_err(|m| loc.error(s.span(), format!("sizes[{i}]"), m))?;
            if sizes.contains(&n) {
                return Err(loc.error(s.span(), format!("sizes[{i}]"), format!("size {n} is listed twice")));
            }
            sizes.push(n);
        }

        Ok(SweepConfig {
            model,
            fixed,
            axes,
            observables,
            sizes,
            temperature,
            output: PathBuf::from(raw.output.unwrap_or_else(|| "qcrit-out".into())),
            source: text.to_string(),
        })
    }

    /// Full parameter tuple at the given axis values, schema defaults filled in.
    pub fn parameters(&self, swept: &[f64]) -> BTreeMap<String, f64> {
        let mut params: BTreeMap<String, f64> =
            self.model.params().iter().filter_map(|p| p.default.map(|d| (p.name.to_string(), d))).collect();
        params.extend(self.fixed.iter().map(|(k, v)| (k.clone(), *v)));
        for (axis, v) in self.axes.iter().zip(swept) {
            params.insert(axis.name.clone(), *v);
        }
        params
    }
}
