//! CSV output with '#'-prefixed metadata lines. Float columns use Rust's
//! shortest round-trip formatting so identical runs produce identical
//! bytes.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

pub struct Report {
    metadata: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        let mut r = Report {
            metadata: Vec::new(),
            header: Vec::new(),
            rows: Vec::new(),
        };
        r.meta("command", command);
        r.meta("version", env!("CARGO_PKG_VERSION"));
        r
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Report {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&mut self, columns: &[&str]) -> &mut Report {
        self.header = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: &[&dyn ToString]) -> &mut Report {
        let cells: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        assert_eq!(cells.len(), self.header.len(), "row width");
        self.rows.push(cells);
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        let body = self.to_csv();
        match out {
            Some(path) => std::fs::write(path, body)
                .with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout()
                .write_all(body.as_bytes())
                .context("writing stdout")?,
        }
        Ok(())
    }
}

/// Column formatter for f64 cells (shortest round-trip representation).
pub fn f(x: f64) -> String {
    format!("{x}")
}
