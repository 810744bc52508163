//! Tab-delimited tables with a `#`-prefixed metadata block.

use std::path::Path;

use crate::error::{CliError, Result};

/// Full-precision decimal form (17 significant digits).
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Cells may not contain tabs or newlines.
pub fn sanitize(cell: &str) -> String {
    cell.replace(['\t', '\n', '\r'], " ")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { metadata: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), sanitize(&value.into())));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut table = Table::default();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header = loop {
            match lines.next() {
                Some((_, line)) if line.starts_with('#') => {
                    let body = line.trim_start_matches('#').trim();
                    let (k, v) = body.split_once(':').unwrap_or((body, ""));
                    table.metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                Some((_, line)) => break line,
                None => return Err("no header row".into()),
            }
        };
        table.columns = header.split('\t').map(str::to_string).collect();
        for (i, line) in lines {
            let row: Vec<String> = line.split('\t').map(str::to_string).collect();
            if row.len() != table.columns.len() {
                return Err(format!("line {}: {} cells, header has {}", i + 1, row.len(), table.columns.len()));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Table::parse(&text).map_err(|m| CliError::config(path.display().to_string(), m))
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Index of `name`, or an error naming every available column.
    pub fn column(&self, name: &str) -> std::result::Result<usize, String> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| format!("unknown column '{name}'; available columns: {}", self.columns.join(", ")))
    }
}
