//! CSV emission. A table is a `#`-prefixed metadata block (command,
//! timestamp, resolved configuration), one header line, data rows, and
//! optional trailing `#` comment lines for derived summaries. Floats print
//! as `{:.16e}`; non-finite values render as empty cells so downstream
//! parsers never meet a NaN. File output goes through a temporary file and
//! an atomic rename.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Cell::Float(v) if v.is_finite() => {
                let _ = write!(out, "{v:.16e}");
            }
            Cell::Float(_) | Cell::Empty => {}
            Cell::Text(s) => {
                debug_assert!(!s.contains(',') && !s.contains('\n'));
                out.push_str(s);
            }
        }
    }
}

pub fn float(v: f64) -> Cell {
    Cell::Float(v)
}

pub fn int(v: usize) -> Cell {
    Cell::Int(v as i128)
}

pub fn text(s: impl Into<String>) -> Cell {
    Cell::Text(s.into())
}

pub fn opt_float(v: Option<f64>) -> Cell {
    v.map(Cell::Float).unwrap_or(Cell::Empty)
}

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub trailing: Vec<String>,
}

impl Table {
    pub fn new(command: &'static str, meta: Vec<(String, String)>, columns: Vec<&'static str>) -> Self {
        Self { command, meta, columns, rows: Vec::new(), trailing: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.trailing.push(line.into());
    }

    pub fn render(&self) -> String {
        let unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut s = String::new();
        let _ = writeln!(s, "# glauber-lab {}", self.command);
        let _ = writeln!(s, "# generated_unix = {unix}");
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                cell.render(&mut line);
            }
            let _ = writeln!(s, "{line}");
        }
        for c in &self.trailing {
            let _ = writeln!(s, "# {c}");
        }
        s
    }
}

/// Writes to `out`, or to stdout when no path is given.
pub fn write_table(table: &Table, out: Option<&Path>) -> std::io::Result<()> {
    let body = table.render();
    match out {
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
            let result = (|| {
                std::fs::write(&tmp, body.as_bytes())?;
                std::fs::rename(&tmp, path)
            })();
            if result.is_err() {
                let _ = std::fs::remove_file(&tmp);
            }
            result
        }
    }
}
