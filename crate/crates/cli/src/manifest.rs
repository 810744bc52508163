//! JSON run manifests, written before a sweep starts and finalized after.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{CliError, Result};

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Running,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Pending,
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub params: BTreeMap<String, Json>,
    pub size: usize,
    pub status: PointStatus,
    pub cache_hit: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub state: RunState,
    pub config_path: String,
    /// The configuration file verbatim.
    pub config: String,
    pub model: String,
    pub cache_enabled: bool,
    pub wall_time_seconds: f64,
    pub cache_hits: usize,
    pub points: Vec<PointRecord>,
    /// Table file name to SHA-256.
    pub tables: BTreeMap<String, String>,
    /// Cache key to SHA-256 of the stored spectrum.
    pub cache: BTreeMap<String, String>,
}

/// JSON has no infinities; those parameters are written as strings.
pub fn json_number(x: f64) -> Json {
    serde_json::Number::from_f64(x).map(Json::Number).unwrap_or_else(|| Json::String(crate::table::format_float(x)))
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(FILE_NAME);
        let tmp = dir.join(format!("{FILE_NAME}.tmp"));
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(&tmp, text + "\n").map_err(|source| CliError::Write { path: tmp.clone(), source })?;
        std::fs::rename(&tmp, &path).map_err(|source| CliError::Write { path, source })
    }

    /// The manifest in `dir`, if one exists and parses.
    pub fn read(dir: &Path) -> Option<Manifest> {
        let text = std::fs::read_to_string(dir.join(FILE_NAME)).ok()?;
        serde_json::from_str(&text).ok()
    }
}
