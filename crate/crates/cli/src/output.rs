//! Report rendering: canonical JSON with sorted keys, RFC 4180 CSV, and
//! plain text.

use clap::ValueEnum;
use serde_json::Value;

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Flattens nested objects and arrays into dotted keys, in sorted order.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", value, &mut out);
    out
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// A single report. JSON objects come out with sorted keys because
/// `serde_json::Map` is ordered.
pub fn render_record(value: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        Format::Csv => render_table(&[flatten(value)]),
        Format::Text => Ok(flatten(value)
            .into_iter()
            .map(|(k, v)| format!("{k}: {v}\n"))
            .collect()),
    }
}

/// Rows of `(column, value)` pairs; the header comes from the first row.
pub fn render_table(rows: &[Vec<(String, String)>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        w.write_record(first.iter().map(|(k, _)| k))?;
    }
    for row in rows {
        w.write_record(row.iter().map(|(_, v)| v))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn render_text_table(rows: &[Vec<(String, String)>]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let ncol = first.len();
    let mut widths: Vec<usize> = first.iter().map(|(k, _)| k.len()).collect();
    for row in rows {
        for (i, (_, v)) in row.iter().enumerate().take(ncol) {
            widths[i] = widths[i].max(v.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            + "\n"
    };
    let mut out = line(first.iter().map(|(k, _)| k.as_str()).collect());
    for row in rows {
        out.push_str(&line(row.iter().map(|(_, v)| v.as_str()).collect()));
    }
    out
}
