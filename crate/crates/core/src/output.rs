//! CSV and JSON artifacts.
//!
//! CSV files start with a block of `# key = value` lines recording every
//! size and tolerance used, followed by an RFC 4180 table. Numbers use the
//! shortest decimal form that round-trips. No timestamps are written, so
//! identical runs give identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value as Json;

use crate::config::Format;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub header: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Json,
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn opt_int(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Artifact {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Artifact {
            header: Vec::new(),
            columns,
            rows: Vec::new(),
            json: Json::Null,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set_json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        self.json = serde_json::to_value(value)?;
        Ok(())
    }

    pub fn csv_body(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.header {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.csv_body()?);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let header: serde_json::Map<String, Json> = self
            .header
            .iter()
            .map(|(k, v)| (k.clone(), Json::String(v.clone())))
            .collect();
        let doc = serde_json::json!({ "header": header, "result": self.json });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes to `path`, or stdout when `path` is `None`.
    pub fn write(&self, format: Format, path: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => fs::write(p, text)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
            }
        }
        Ok(())
    }
}

/// Splits a rendered CSV into its `#` header lines and its body.
pub fn split_csv(text: &str) -> (Vec<&str>, String) {
    let mut header = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if body.is_empty() && line.starts_with('#') {
            header.push(line);
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    (header, body)
}
