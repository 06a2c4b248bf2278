//! Numeric CSV input: rows are observations, columns are variables.

use std::io::Read;
use std::path::Path;

use ndarray::Array2;
use spearfact::DataMatrix;

use crate::error::{CliError, CliResult};

/// Parsed numeric table with optional column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Option<Vec<String>>,
    pub values: Array2<f64>,
}

impl Table {
    /// `column N ('name')` with a 1-based index.
    pub fn describe_column(&self, col: usize) -> String {
        match self.names.as_ref().and_then(|n| n.get(col)) {
            Some(name) => format!("column {} ('{name}')", col + 1),
            None => format!("column {}", col + 1),
        }
    }
}

pub fn read_table_path(path: &Path) -> CliResult<Table> {
    let file = std::fs::File::open(path).map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    read_table(file)
}

/// Reads a complete numeric table. The first row is taken as a header when
/// any of its cells is not a number. Errors carry 1-based data row, file
/// line and column.
pub fn read_table<R: Read>(reader: R) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(format!("malformed CSV: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(CliError::input("input is empty"));
    };
    let is_header = first.iter().any(|c| !c.is_empty() && c.parse::<f64>().is_err());
    let names = is_header.then(|| first.iter().map(str::to_string).collect::<Vec<_>>());
    let body = if is_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(CliError::input("input has no data rows"));
    }
    let width = names.as_ref().map_or(body[0].1.len(), Vec::len);
    let mut values = Array2::<f64>::zeros((body.len(), width));
    for (i, (line, rec)) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(CliError::input(format!(
                "ragged input: row {} (line {line}) has {} fields, expected {width}",
                i + 1,
                rec.len()
            )));
        }
        for (j, cell) in rec.iter().enumerate() {
            let at = || format!("row {} (line {line}), column {}", i + 1, j + 1);
            if cell.is_empty() {
                return Err(CliError::input(format!("missing value at {}", at())));
            }
            let v: f64 = cell.parse().map_err(|_| CliError::input(format!("non-numeric cell '{cell}' at {}", at())))?;
            if !v.is_finite() {
                return Err(CliError::input(format!("non-finite cell '{cell}' at {}", at())));
            }
            values[[i, j]] = v;
        }
    }
    Ok(Table { names, values })
}

/// Reads the table and wraps it as observations x variables.
pub fn read_data(path: &Path, transpose: bool) -> CliResult<(Table, DataMatrix)> {
    let mut table = read_table_path(path)?;
    if transpose {
        table.values = table.values.t().to_owned();
        table.names = None;
    }
    let data = DataMatrix::new(table.values.clone())?;
    Ok((table, data))
}

/// Maps a core error to a CLI error, naming the column for zero variance.
pub fn explain(table: &Table, e: spearfact::Error) -> CliError {
    match e {
        spearfact::Error::ZeroVariance { col } => {
            CliError::input(format!("{} has zero variance", table.describe_column(col)))
        }
        other => other.into(),
    }
}
