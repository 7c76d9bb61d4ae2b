//! Tabular output: CSV with `#`-prefixed metadata, and a JSON mirror.

use std::io::Write;

use serde::Serialize;
use serde_json::json;

use crate::error::Result;
use crate::spectra::{squeezing_db, QuadratureSpectrum};
use crate::sweep::SweepResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    fn to_field(&self) -> String {
        match self {
            // no negative zeros in text output
            Cell::Num(v) if *v == 0.0 => "0".into(),
            Cell::Num(v) => format!("{v}"),
            Cell::Bool(b) => format!("{b}"),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (key, value) in &self.metadata {
            writeln!(out, "# {key}: {value}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::to_field))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let metadata: serde_json::Map<String, serde_json::Value> = self
            .metadata
            .iter()
            .map(|(k, v)| {
                // embedded JSON documents stay structured
                let value = serde_json::from_str(v).unwrap_or_else(|_| json!(v));
                (k.clone(), value)
            })
            .collect();
        let doc = json!({
            "metadata": metadata,
            "columns": self.columns,
            "rows": self.rows,
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

/// Spectrum table with columns omega_over_omega_b, S, dB, phi (φ in units of π).
pub fn spectrum_table(spectrum: &QuadratureSpectrum, omega_b: f64) -> Table {
    let mut table = Table::new(&["omega_over_omega_b", "S", "dB", "phi"]);
    table.meta("units", "omega in omega_b, phi in multiples of pi");
    for (k, (&w, &s)) in spectrum.omegas.iter().zip(&spectrum.values).enumerate() {
        table.rows.push(vec![
            Cell::Num(w / omega_b),
            Cell::Num(s),
            squeezing_db(s).ok().into(),
            Cell::Num(spectrum.phi_at(k) / std::f64::consts::PI),
        ]);
    }
    table
}

/// Long-form sweep table: one row per grid point.
pub fn sweep_table(result: &SweepResult) -> Table {
    let mut columns: Vec<String> = result.axes.iter().map(|a| a.key.to_string()).collect();
    columns.extend(result.quantities.iter().map(|q| q.column().to_string()));
    columns.extend(["phi", "stable", "above_vacuum"].map(String::from));
    let mut table = Table {
        metadata: Vec::new(),
        columns,
        rows: Vec::new(),
    };
    let units: Vec<String> = result
        .axes
        .iter()
        .map(|a| format!("{} in {}", a.key, a.unit))
        .collect();
    table.meta("units", format!("{}; phi in multiples of pi", units.join("; ")));
    for k in 0..result.len() {
        let mut row: Vec<Cell> = result.coordinates(k).into_iter().map(Cell::Num).collect();
        row.extend(result.values.iter().map(|col| Cell::from(col[k])));
        row.push(result.phi[k].map(|p| p / std::f64::consts::PI).into());
        row.push(result.stable[k].into());
        row.push(result.above_vacuum[k].into());
        table.rows.push(row);
    }
    table
}
