//! FRED-MD style macro panels: a header row, a `Transform:` row of codes,
//! then one dated row per period.
//!
//! | code | transform                  | lag |
//! |------|----------------------------|-----|
//! | 1    | `x_t`                      | 0   |
//! | 2    | `x_t - x_{t-1}`            | 1   |
//! | 3    | second difference          | 2   |
//! | 4    | `ln x_t`                   | 0   |
//! | 5    | `ln x_t - ln x_{t-1}`      | 1   |
//! | 6    | second difference of `ln`  | 2   |
//! | 7    | `x_t/x_{t-1} - x_{t-1}/x_{t-2}` | 2 |
//!
//! Missing cells (empty, `NA`, `NaN`, `.`) and logs of non-positive values
//! become gaps. Outliers are left alone.

use std::io::{Read, Write};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransformCode(u8);

impl TransformCode {
    pub fn new(code: u8) -> CliResult<Self> {
        if (1..=7).contains(&code) {
            Ok(Self(code))
        } else {
            Err(CliError::input(format!("unknown transform code {code} (expected 1..7)")))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    /// Rows lost at the start of the series.
    pub fn lag(self) -> usize {
        match self.0 {
            1 | 4 => 0,
            2 | 5 => 1,
            _ => 2,
        }
    }

    /// Applies the transform; the first `lag()` entries are always `NaN`.
    pub fn apply(self, x: &[f64]) -> Vec<f64> {
        let ln = |v: f64| if v > 0.0 { v.ln() } else { f64::NAN };
        let diff = |v: &[f64]| -> Vec<f64> {
            (0..v.len()).map(|t| if t == 0 { f64::NAN } else { v[t] - v[t - 1] }).collect()
        };
        match self.0 {
            1 => x.to_vec(),
            2 => diff(x),
            3 => diff(&diff(x)),
            4 => x.iter().map(|&v| ln(v)).collect(),
            5 => diff(&x.iter().map(|&v| ln(v)).collect::<Vec<_>>()),
            6 => diff(&diff(&x.iter().map(|&v| ln(v)).collect::<Vec<_>>())),
            _ => {
                let growth: Vec<f64> =
                    (0..x.len()).map(|t| if t == 0 { f64::NAN } else { x[t] / x[t - 1] - 1.0 }).collect();
                diff(&growth)
            }
        }
    }
}

fn parse_code(cell: &str, col: usize) -> CliResult<TransformCode> {
    let v: f64 = cell
        .parse()
        .map_err(|_| CliError::input(format!("column {}: transform code '{cell}' is not a number", col + 1)))?;
    if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
        return Err(CliError::input(format!("column {}: unknown transform code {cell}", col + 1)));
    }
    TransformCode::new(v as u8).map_err(|e| CliError::input(format!("column {}: {e}", col + 1)))
}

fn parse_value(cell: &str) -> f64 {
    match cell {
        "" | "NA" | "NaN" | "nan" | "." => f64::NAN,
        s => s.parse::<f64>().ok().filter(|v| v.is_finite()).unwrap_or(f64::NAN),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub names: Vec<String>,
    /// Row-major, `rows x names.len()`.
    pub rows: Vec<Vec<f64>>,
    pub dropped: Vec<String>,
    pub trimmed: usize,
}

/// Transforms every series, trims the leading rows lost to the largest lag,
/// and drops every column that still has a gap.
pub fn ingest_fredmd<R: Read>(reader: R) -> CliResult<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(format!("malformed CSV: {e}")))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    if records.len() < 3 {
        return Err(CliError::input("expected a header row, a transform-code row and at least one data row"));
    }
    let header = &records[0];
    let width = header.len();
    if width < 2 {
        return Err(CliError::input("expected a date column and at least one series"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let code_row = &records[1];
    if code_row.len() != width {
        return Err(CliError::input(format!("transform row has {} fields, expected {width}", code_row.len())));
    }
    let codes = code_row.iter().skip(1).enumerate().map(|(j, c)| parse_code(c, j + 1)).collect::<CliResult<Vec<_>>>()?;

    let body = &records[2..];
    let mut columns = vec![Vec::with_capacity(body.len()); names.len()];
    for (i, rec) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(CliError::input(format!("data row {} has {} fields, expected {width}", i + 1, rec.len())));
        }
        for (j, cell) in rec.iter().skip(1).enumerate() {
            columns[j].push(parse_value(cell));
        }
    }

    let trimmed = codes.iter().map(|c| c.lag()).max().unwrap_or(0);
    if trimmed >= body.len() {
        return Err(CliError::input("too few data rows for the requested differencing"));
    }
    let mut kept_names = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for ((name, code), col) in names.into_iter().zip(&codes).zip(&columns) {
        let series: Vec<f64> = code.apply(col).split_off(trimmed);
        if series.iter().all(|v| v.is_finite()) {
            kept_names.push(name);
            kept.push(series);
        } else {
            dropped.push(name);
        }
    }
    if kept.is_empty() {
        return Err(CliError::input("every column has missing values after transformation"));
    }
    let rows = (0..body.len() - trimmed).map(|t| kept.iter().map(|c| c[t]).collect()).collect();
    Ok(Ingested { names: kept_names, rows, dropped, trimmed })
}

pub fn write_matrix<W: Write>(out: W, names: &[String], rows: &[Vec<f64>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::input(format!("write failed: {e}"));
    w.write_record(names).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
