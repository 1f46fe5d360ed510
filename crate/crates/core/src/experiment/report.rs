use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use super::config::{Command, ExperimentConfig};
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_sig12(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }
}

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reproduces the rounded value.
pub fn format_sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}")
        .parse()
        .expect("scientific notation parses");
    format!("{rounded}")
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Free-form remarks shown in the footer, never in the CSV.
    pub notes: Vec<String>,
    /// `Some(false)` when a verification command found a failing check.
    pub verified: Option<bool>,
    pub wall_time: Duration,
    pub version: &'static str,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            verified: None,
            wall_time: Duration::ZERO,
            version: VERSION,
        }
    }

    pub fn command(&self) -> Command {
        self.config.command
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    pub fn footer(&self) -> String {
        let mut s = format!(
            "# bundle-auction-lab {} | command {} | seed {} | wall time {:.3}s",
            self.version,
            self.command(),
            self.config.seed,
            self.wall_time.as_secs_f64()
        );
        if let Some(v) = self.verified {
            s.push_str(if v {
                " | verified"
            } else {
                " | VERIFICATION FAILED"
            });
        }
        for note in &self.notes {
            s.push_str("\n# ");
            s.push_str(note);
        }
        s
    }
}

pub fn emit_csv(report: &RunReport, path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    report.write_csv(file)
}
