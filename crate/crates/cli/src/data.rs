//! Reading one numeric column from a CSV file with a header row.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// Values of `column`, selected by header name or, failing that, by 1-based
/// position.
pub fn read_column(path: &Path, column: &str) -> CliResult<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .clone();
    let index = headers
        .iter()
        .position(|h| h == column)
        .or_else(|| {
            column
                .parse::<usize>()
                .ok()
                .filter(|&i| i >= 1 && i <= headers.len())
                .map(|i| i - 1)
        })
        .ok_or_else(|| {
            CliError::Input(format!(
                "column '{column}' not found; available: {}",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })?;

    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = record.get(index).unwrap_or("");
        let value: f64 = cell.parse().map_err(|_| {
            CliError::Input(format!(
                "line {line}, column '{column}': '{cell}' is not a number"
            ))
        })?;
        values.push(value);
    }
    Ok(values)
}
