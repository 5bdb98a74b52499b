use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// What a subcommand produces before formatting.
pub struct Rendered {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    /// Emit `json` (an array) as one object per line.
    pub json_lines: bool,
    /// Extra lines printed above the table.
    pub notes: Vec<String>,
    pub exit: u8,
}

impl Rendered {
    pub fn new(header: &[&str], rows: Vec<Vec<String>>, json: Value) -> Self {
        Rendered {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
            json,
            json_lines: false,
            notes: Vec::new(),
            exit: 0,
        }
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Json if self.json_lines => {
                for item in self.json.as_array().into_iter().flatten() {
                    writeln!(out, "{}", serde_json::to_string(item)?)?;
                }
            }
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&self.json)?)?,
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.flush()?;
            }
            Format::Table => {
                for note in &self.notes {
                    writeln!(out, "{note}")?;
                }
                write_table(out, &self.header, &self.rows)?;
            }
        }
        Ok(())
    }
}

fn write_table(out: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(header))?;
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    writeln!(out, "{}", rule.join("  "))?;
    for row in rows {
        writeln!(out, "{}", line(row))?;
    }
    Ok(())
}

/// A JSON number when it fits in `u64`, a decimal string otherwise.
pub fn big_json(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn bigint_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}
