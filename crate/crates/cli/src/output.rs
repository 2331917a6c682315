use clap::ValueEnum;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// A command's result: the JSON payload plus a tabular view of it.
pub struct Output {
    pub result: Value,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    /// Tabulates the payload as `key,value` pairs of its leaves.
    pub fn flat(result: Value) -> Self {
        let mut rows = Vec::new();
        flatten("", &result, &mut rows);
        Output { result, headers: vec!["key".into(), "value".into()], rows }
    }

    pub fn tabular(result: Value, headers: &[&str], rows: Vec<Vec<String>>) -> Self {
        Output { result, headers: headers.iter().map(|h| h.to_string()).collect(), rows }
    }

    pub fn render(&self, format: Format, command: &[String], window: u32) -> Result<String, String> {
        match format {
            Format::Json => {
                let envelope = json!({ "command": command, "window": window, "result": self.result });
                serde_json::to_string_pretty(&envelope).map(|s| s + "\n").map_err(|e| e.to_string())
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers).map_err(|e| e.to_string())?;
                for row in &self.rows {
                    w.write_record(row).map_err(|e| e.to_string())?;
                }
                let bytes = w.into_inner().map_err(|e| e.to_string())?;
                String::from_utf8(bytes).map_err(|e| e.to_string())
            }
            Format::Table => Ok(table(&self.headers, &self.rows)),
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, child) in map {
                flatten(&join(k), child, out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
        other => out.push(vec![prefix.to_string(), other.to_string()]),
    }
}

fn table(headers: &[String], rows: &[Vec<String>]) -> String {
    let width = |i: usize| {
        rows.iter().map(|r| r.get(i).map_or(0, |c| c.chars().count())).chain([headers[i].chars().count()]).max().unwrap_or(0)
    };
    let widths: Vec<usize> = (0..headers.len()).map(width).collect();
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers);
    out += &line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for row in rows {
        out += &line(row);
    }
    out
}

/// One-line summary of a verdict JSON for table cells.
pub fn witness_cell(verdict: &Value) -> String {
    match (verdict.get("witness"), verdict.get("reason")) {
        (Some(w), _) => w.to_string(),
        (None, Some(Value::String(r))) => r.clone(),
        _ => String::new(),
    }
}
