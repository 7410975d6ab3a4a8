//! CSV tables with a `#` header, a JSON sidecar and a gnuplot template.
//!
//! Table layout:
//!
//! ```text
//! # tool = semsans 0.1.0
//! # command = phase
//! # config_sha256 = 3f5a...
//! # units = m,rad,rad
//! y,phi1,phi2
//! -2.0000000000000000e-02,...
//! ```
//!
//! Values use 17 significant digits so they parse back bit for bit.

use crate::error::{CliError, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const TOOL: &str = concat!("semsans ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Column { name: name.into(), unit: unit.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Header comments, `key = value`.
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

/// How a table should be plotted by the generated script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    /// First column on the x axis, every other column as a line.
    Lines,
    /// `x, y, value...` sampled on a grid.
    Map,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table { meta: BTreeMap::new(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let units: Vec<&str> = self.columns.iter().map(|c| c.unit.as_str()).collect();
        let _ = writeln!(s, "# units = {}", units.join(","));
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// Parse text written by [`Table::to_csv`].
    pub fn from_csv(text: &str) -> Result<Table> {
        let mut meta = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let Some(body) = line.strip_prefix('#') else { break };
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| CliError::parse(i + 1, 1, "header comment is not `key = value`"))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
        let units: Vec<String> = meta
            .remove("units")
            .ok_or_else(|| CliError::parse(1, 1, "missing `# units` header"))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let names: Vec<String> = reader
            .headers()
            .map_err(|e| csv_error(&e))?
            .iter()
            .map(str::to_string)
            .collect();
        if names.len() != units.len() {
            return Err(CliError::parse(1, 1, format!("{} columns but {} units", names.len(), units.len())));
        }
        let columns = names.into_iter().zip(units).map(|(name, unit)| Column { name, unit }).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&e))?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let row = record
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.parse::<f64>()
                        .map_err(|_| CliError::parse(line, j + 1, format!("`{cell}` is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Table { meta, columns, rows })
    }
}

fn csv_error(e: &csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    CliError::parse(line, 1, e.to_string())
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'a str,
    command: &'a str,
    config_sha256: &'a str,
    seed: Option<u64>,
    data: String,
    plot: String,
    rows: usize,
    columns: Vec<SidecarColumn<'a>>,
    summary: &'a BTreeMap<String, String>,
}

#[derive(Serialize)]
struct SidecarColumn<'a> {
    name: &'a str,
    unit: &'a str,
}

/// Shared header values for everything a single run writes.
#[derive(Debug, Clone)]
pub struct Emitter {
    pub out_dir: PathBuf,
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Emitter {
    /// Write `<stem>.csv`, `<stem>.meta.json` and `<stem>.gp`; returns the CSV path.
    pub fn emit(&self, stem: &str, mut table: Table, style: PlotStyle, summary: &BTreeMap<String, String>) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))?;
        table.meta.insert("tool".into(), TOOL.into());
        table.meta.insert("command".into(), self.command.clone());
        table.meta.insert("config_sha256".into(), self.config_sha256.clone());
        if let Some(seed) = self.seed {
            table.meta.insert("seed".into(), seed.to_string());
        }
        let data = format!("{stem}.csv");
        let plot = format!("{stem}.gp");
        let csv_path = self.out_dir.join(&data);
        write(&csv_path, &table.to_csv())?;
        write(&self.out_dir.join(&plot), &gnuplot(&data, &table, style))?;
        let sidecar = Sidecar {
            tool: TOOL,
            command: &self.command,
            config_sha256: &self.config_sha256,
            seed: self.seed,
            data,
            plot,
            rows: table.rows.len(),
            columns: table.columns.iter().map(|c| SidecarColumn { name: &c.name, unit: &c.unit }).collect(),
            summary,
        };
        let mut json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
        json.push('\n');
        write(&self.out_dir.join(format!("{stem}.meta.json")), &json)?;
        Ok(csv_path)
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn gnuplot(data: &str, table: &Table, style: PlotStyle) -> String {
    let label = |c: &Column| format!("{} [{}]", c.name, c.unit);
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot template for {data}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    match style {
        PlotStyle::Lines => {
            let _ = writeln!(s, "set xlabel '{}'", label(&table.columns[0]));
            let curves: Vec<String> = (2..=table.columns.len())
                .map(|j| format!("'{data}' using 1:{j} with lines"))
                .collect();
            let _ = writeln!(s, "plot {}", curves.join(", \\\n     "));
        }
        PlotStyle::Map => {
            let _ = writeln!(s, "set xlabel '{}'", label(&table.columns[0]));
            let _ = writeln!(s, "set ylabel '{}'", label(&table.columns[1]));
            let _ = writeln!(s, "set size ratio -1");
            let _ = writeln!(s, "set view map");
            let _ = writeln!(s, "# choose the plotted quantity with COL (default: third column)");
            let _ = writeln!(s, "if (!exists('COL')) COL = 3");
            let _ = writeln!(s, "plot '{data}' using 1:2:COL with image");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec![Column::new("y", "m"), Column::new("phase", "rad")]);
        t.meta.insert("command".into(), "phase".into());
        t.push(vec![-1e-3, 0.1 + 0.2]);
        t.push(vec![0.0, -std::f64::consts::PI]);
        t.push(vec![1.0 / 3.0, 6.02214076e23]);
        t
    }

    #[test]
    fn csv_round_trips_exactly() {
        let t = sample();
        let text = t.to_csv();
        assert!(!text.contains('\r'));
        let back = Table::from_csv(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("phase").unwrap()[0].to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn seventeen_significant_digits() {
        let line = sample().to_csv().lines().nth(3).unwrap().to_string();
        let first = line.split(',').next().unwrap();
        assert_eq!(first, "-1.0000000000000000e-3");
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(Table::from_csv("y,phase\n1,2\n").is_err());
        assert!(Table::from_csv("# units = m,rad\ny,phase\n1,two\n").is_err());
        assert!(Table::from_csv("# units = m\ny,phase\n1,2\n").is_err());
    }

    #[test]
    fn hashes_are_hex_sha256() {
        assert_eq!(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
