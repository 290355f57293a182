//! Diagnostics CSV: header row, one row per recorded step, floats in
//! shortest round-trip decimal.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use cch_core::{DiagnosticsRow, DiagnosticsSpec};

use crate::error::{CliError, Result};

/// Shortest decimal that parses back to the same bits; exponent form
/// outside `[1e-4, 1e15)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn format_row(values: &[f64]) -> String {
    values.iter().map(|&v| format_float(v)).collect::<Vec<_>>().join(",")
}

pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    /// Truncates `path` and writes the header.
    pub fn create(path: &Path, spec: &DiagnosticsSpec) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", spec.column_names().join(","))?;
        Ok(Self { out })
    }

    /// Appends to an existing file whose header is already in place.
    pub fn append(path: &Path) -> Result<Self> {
        let file = std::fs::OpenOptions::new().append(true).open(path)?;
        Ok(Self { out: BufWriter::new(file) })
    }

    pub fn write_row(&mut self, row: &DiagnosticsRow) -> Result<()> {
        writeln!(self.out, "{}", format_row(&row.values()))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Header and numeric rows of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let columns: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Csv(format!("bad number {s}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Csv(format!("no column {name}; have {}", self.columns.join(","))))
    }

    /// `(t, value)` pairs of one column.
    pub fn series(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let t = self.column_index("t")?;
        let c = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| (r[t], r[c])).collect())
    }

    /// Parses every row as a diagnostics row of `spec`, checking the header.
    pub fn diagnostics_rows(&self, spec: &DiagnosticsSpec) -> Result<Vec<DiagnosticsRow>> {
        if self.columns != spec.column_names() {
            return Err(CliError::Csv("header does not match the diagnostics schema".into()));
        }
        self.rows.iter().map(|r| Ok(DiagnosticsRow::from_values(spec, r)?)).collect()
    }
}

/// Drops every data row with `t > t_max`, keeping the header and the
/// surviving lines byte for byte.
pub fn truncate_after(path: &Path, t_max: f64) -> Result<usize> {
    let text = std::fs::read_to_string(path)?;
    let mut kept = String::with_capacity(text.len());
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if i > 0 {
            let t: f64 = line
                .split(',')
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Csv(format!("line {}: no time value", i + 1)))?;
            if t > t_max {
                break;
            }
            rows += 1;
        }
        kept.push_str(line);
        kept.push('\n');
    }
    std::fs::write(path, kept)?;
    Ok(rows)
}
