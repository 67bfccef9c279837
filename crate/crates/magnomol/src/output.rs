//! Flat tabular emission of sweep results as CSV or JSON.
//!
//! Every run uses one fixed column set; measures that are missing
//! (unstable point, unrequested measure, undefined contrast) are written
//! as empty CSV fields / JSON nulls, never as zero. Floats are printed
//! with 17 significant digits in scientific notation so a parsed file
//! reproduces the in-memory values bit for bit.

use crate::measures::CorrelationReport;
use crate::sweep::{ContrastRow, SweepResult};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One table cell of an [`OutputRecord`] row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn from_opt(value: Option<f64>) -> Self {
        match value {
            Some(v) => Cell::Float(v),
            None => Cell::Empty,
        }
    }

    /// CSV rendering; floats at full round-trip precision.
    pub fn to_csv_field(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Empty => serde_json::Value::Null,
            Cell::Float(v) => serde_json::json!(v),
            Cell::Text(s) => serde_json::json!(s),
            Cell::Bool(b) => serde_json::json!(b),
        }
    }
}

/// 17 significant digits, scientific notation: enough to round-trip any
/// f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// The flat key-value row schema shared by the CSV and JSON writers.
pub struct OutputRecord {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

const REPORT_COLUMNS: [&str; 21] = [
    "stable",
    "spectral_abscissa",
    "nu_min",
    "physicality_min_eig",
    "e_am",
    "e_aB",
    "e_mB",
    "r_a_mB",
    "r_m_aB",
    "r_B_am",
    "r_min",
    "d_am",
    "d_aB",
    "d_mB",
    "g_a_to_m",
    "g_m_to_a",
    "g_a_to_B",
    "g_B_to_a",
    "g_m_to_B",
    "g_B_to_m",
    "error",
];

const CONTRAST_COLUMNS: [&str; 4] = [
    "contrast_e_am",
    "contrast_e_aB",
    "contrast_e_mB",
    "contrast_r_min",
];

fn report_cells(report: &CorrelationReport) -> Vec<Cell> {
    vec![
        Cell::Bool(report.stable),
        Cell::Float(report.spectral_abscissa),
        Cell::from_opt(report.nu_min),
        Cell::from_opt(report.physicality_min_eig),
        Cell::from_opt(report.e_am),
        Cell::from_opt(report.e_ab),
        Cell::from_opt(report.e_mb),
        Cell::from_opt(report.r_a_mb),
        Cell::from_opt(report.r_m_ab),
        Cell::from_opt(report.r_b_am),
        Cell::from_opt(report.r_min),
        Cell::from_opt(report.d_am),
        Cell::from_opt(report.d_ab),
        Cell::from_opt(report.d_mb),
        Cell::from_opt(report.g_a_to_m),
        Cell::from_opt(report.g_m_to_a),
        Cell::from_opt(report.g_a_to_b),
        Cell::from_opt(report.g_b_to_a),
        Cell::from_opt(report.g_m_to_b),
        Cell::from_opt(report.g_b_to_m),
        Cell::Empty,
    ]
}

fn error_cells(message: &str) -> Vec<Cell> {
    let mut cells = vec![Cell::Empty; REPORT_COLUMNS.len()];
    cells[REPORT_COLUMNS.len() - 1] = Cell::Text(message.to_string());
    cells
}

/// Flattens a sweep result into the output table. Contrast columns repeat
/// the per-grid-point contrast on both branch rows of that point.
pub fn sweep_record(result: &SweepResult) -> OutputRecord {
    let mut columns: Vec<String> = result
        .spec
        .axes
        .iter()
        .map(|a| a.param.name().to_string())
        .collect();
    columns.push("branch".into());
    columns.extend(REPORT_COLUMNS.iter().map(|c| c.to_string()));
    columns.extend(CONTRAST_COLUMNS.iter().map(|c| c.to_string()));

    let contrast_by_grid: HashMap<usize, &ContrastRow> =
        result.contrasts.iter().map(|c| (c.grid_index, c)).collect();

    let rows = result
        .rows
        .iter()
        .map(|row| {
            let mut cells: Vec<Cell> = row.axis_values.iter().map(|&v| Cell::Float(v)).collect();
            cells.push(Cell::Text(row.branch.label().to_string()));
            match &row.outcome {
                Ok(report) => cells.extend(report_cells(report)),
                Err(message) => cells.extend(error_cells(message)),
            }
            match contrast_by_grid.get(&row.grid_index) {
                Some(c) => {
                    cells.push(Cell::from_opt(c.e_am));
                    cells.push(Cell::from_opt(c.e_ab));
                    cells.push(Cell::from_opt(c.e_mb));
                    cells.push(Cell::from_opt(c.r_min));
                }
                None => cells.extend(std::iter::repeat_n(Cell::Empty, 4)),
            }
            cells
        })
        .collect();

    OutputRecord { columns, rows }
}

/// Writes the sweep as CSV: optional `#`-prefixed metadata comments, a
/// single header row, then one row per (grid point, branch).
pub fn write_csv(result: &SweepResult, w: &mut dyn Write, include_meta: bool) -> io::Result<()> {
    if include_meta {
        writeln!(w, "# magnomol {}", result.metadata.version)?;
        writeln!(w, "# generated {}", result.metadata.timestamp)?;
        let spec = serde_json::to_string(&result.spec).unwrap_or_default();
        writeln!(w, "# spec {spec}")?;
    }
    let record = sweep_record(result);
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(&record.columns)?;
    for row in &record.rows {
        writer.write_record(row.iter().map(Cell::to_csv_field))?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the sweep as a JSON object `{metadata, rows, contrasts}`.
pub fn write_json(result: &SweepResult, w: &mut dyn Write, include_meta: bool) -> io::Result<()> {
    let record = sweep_record(result);
    let rows: Vec<serde_json::Value> = record
        .rows
        .iter()
        .map(|cells| {
            let map: serde_json::Map<String, serde_json::Value> = record
                .columns
                .iter()
                .zip(cells)
                .map(|(name, cell)| (name.clone(), cell.to_json()))
                .collect();
            serde_json::Value::Object(map)
        })
        .collect();

    let axis_names: Vec<&str> = result.spec.axes.iter().map(|a| a.param.name()).collect();
    let contrasts: Vec<serde_json::Value> = result
        .contrasts
        .iter()
        .map(|c| {
            let mut map = serde_json::Map::new();
            for (name, value) in axis_names.iter().zip(&c.axis_values) {
                map.insert(name.to_string(), serde_json::json!(value));
            }
            map.insert("contrast_e_am".into(), Cell::from_opt(c.e_am).to_json());
            map.insert("contrast_e_aB".into(), Cell::from_opt(c.e_ab).to_json());
            map.insert("contrast_e_mB".into(), Cell::from_opt(c.e_mb).to_json());
            map.insert("contrast_r_min".into(), Cell::from_opt(c.r_min).to_json());
            serde_json::Value::Object(map)
        })
        .collect();

    let mut top = serde_json::Map::new();
    if include_meta {
        top.insert(
            "metadata".into(),
            serde_json::json!({
                "version": result.metadata.version,
                "timestamp": result.metadata.timestamp,
                "spec": serde_json::to_value(&result.spec).unwrap_or(serde_json::Value::Null),
            }),
        );
    }
    top.insert("rows".into(), serde_json::Value::Array(rows));
    top.insert("contrasts".into(), serde_json::Value::Array(contrasts));
    serde_json::to_writer_pretty(&mut *w, &serde_json::Value::Object(top))?;
    writeln!(w)?;
    Ok(())
}

/// Single-point report as pretty JSON.
pub fn point_json(report: &CorrelationReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

/// Parses a CSV file produced by [`write_csv`] back into its cells;
/// used to verify the round-trip contract.
pub fn parse_csv(data: &[u8]) -> io::Result<OutputRecord> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(data);
    let columns: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = columns
            .iter()
            .zip(record.iter())
            .map(|(name, field)| {
                if field.is_empty() {
                    Cell::Empty
                } else if name == "branch" || name == "error" {
                    Cell::Text(field.to_string())
                } else if name == "stable" {
                    Cell::Bool(field == "true")
                } else {
                    Cell::Float(field.parse::<f64>().unwrap_or(f64::NAN))
                }
            })
            .collect();
        rows.push(row);
    }
    Ok(OutputRecord { columns, rows })
}

/// Index of a named column, for consumers of parsed CSV.
impl OutputRecord {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}
