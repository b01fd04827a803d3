use std::collections::HashMap;
use std::io::Read;

use super::{validate_spec, Cell, ColumnKind, ColumnSpec, RawLoanTable};
use crate::error::{Error, Result};

/// Reads a column-spec JSON array of `{name, kind, role}` objects.
pub fn read_column_spec<R: Read>(source: R) -> Result<Vec<ColumnSpec>> {
    let spec: Vec<ColumnSpec> = serde_json::from_reader(source)?;
    validate_spec(&spec)?;
    Ok(spec)
}

/// Parses a header-first CSV into a table holding the spec's columns, in
/// spec order. Header columns the spec does not list are skipped. Cells that
/// do not parse as their column kind become [`Cell::Missing`].
pub fn load_csv<R: Read>(source: R, spec: &[ColumnSpec]) -> Result<RawLoanTable> {
    validate_spec(spec)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);

    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        if positions.insert(name.trim(), i).is_some() {
            return Err(Error::Schema(format!(
                "header repeats column `{}`",
                name.trim()
            )));
        }
    }
    let source_index =
        spec.iter()
            .map(|col| {
                positions.get(col.name.as_str()).copied().ok_or_else(|| {
                    Error::Schema(format!("column `{}` not in CSV header", col.name))
                })
            })
            .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: i + 1,
            message: e.to_string(),
        })?;
        let row = spec
            .iter()
            .zip(&source_index)
            .map(|(col, &src)| parse_cell(record.get(src).unwrap_or(""), col.kind))
            .collect();
        rows.push(row);
    }
    Ok(RawLoanTable::from_parts_unchecked(spec.to_vec(), rows))
}

fn parse_cell(raw: &str, kind: ColumnKind) -> Cell {
    let s = raw.trim();
    if s.is_empty() {
        return Cell::Missing;
    }
    match kind {
        ColumnKind::Numeric => parse_numeric(s).map_or(Cell::Missing, Cell::Number),
        ColumnKind::Categorical | ColumnKind::Text | ColumnKind::Date => Cell::Text(s.to_string()),
    }
}

/// Accepts plain numbers, percentages (`"13.56%"` -> 13.56) and a number
/// followed by a unit word (`"36 months"` -> 36).
fn parse_numeric(s: &str) -> Option<f64> {
    let s = s.strip_suffix('%').unwrap_or(s).trim_end();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let mut parts = s.split_whitespace();
    let (value, unit) = (parts.next()?, parts.next()?);
    if parts.next().is_some() || !unit.chars().all(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    value.parse::<f64>().ok().filter(|v| v.is_finite())
}
