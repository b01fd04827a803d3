use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{status_target, Cell, ColumnKind, ColumnRole, DesignMatrix, RawLoanTable};
use crate::error::{Error, Result};

/// Dummy columns generated for one categorical feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DummyMapping {
    pub source: String,
    /// Level without a column of its own (all dummies 0).
    pub baseline: Option<String>,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeReport {
    /// Categorical features with a single observed level.
    pub dropped_zero_variance: Vec<String>,
    /// Text and date features, which have no numeric encoding.
    pub skipped_non_numeric: Vec<String>,
    pub dummies: Vec<DummyMapping>,
}

/// Encoded features without a target, for scoring unlabelled loans.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub x: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
    categorical_sources: HashSet<String>,
}

impl FeatureMatrix {
    /// Reorders columns to `wanted`. A wanted dummy column for a level this
    /// data never shows is all zeros; any other absent column is an error.
    pub fn align(&self, wanted: &[String]) -> Result<Vec<f64>> {
        let index: HashMap<&str, usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let sources = wanted
            .iter()
            .map(|w| match index.get(w.as_str()) {
                Some(&i) => Ok(Some(i)),
                None => match w.split_once('=') {
                    Some((src, _)) if self.categorical_sources.contains(src) => Ok(None),
                    _ => Err(Error::ColumnMismatch(format!("data has no column `{w}`"))),
                },
            })
            .collect::<Result<Vec<_>>>()?;
        let mut x = Vec::with_capacity(self.n_rows * wanted.len());
        for r in 0..self.n_rows {
            let row = &self.x[r * self.n_cols..(r + 1) * self.n_cols];
            x.extend(sources.iter().map(|s| s.map_or(0.0, |i| row[i])));
        }
        Ok(x)
    }
}

enum Plan {
    Numeric(usize),
    Dummies(usize, Vec<String>),
}

fn plan(
    table: &RawLoanTable,
    drop_baseline: bool,
) -> Result<(Vec<Plan>, Vec<String>, EncodeReport)> {
    let mut plans = Vec::new();
    let mut columns = Vec::new();
    let mut report = EncodeReport::default();
    for (j, col) in table.schema().iter().enumerate() {
        if col.role != ColumnRole::Feature {
            continue;
        }
        if let Some(r) = table.column(j).position(Cell::is_missing) {
            return Err(Error::InvalidInput(format!(
                "column `{}` row {r} is missing; resolve missing values before encoding",
                col.name
            )));
        }
        match col.kind {
            ColumnKind::Numeric => {
                plans.push(Plan::Numeric(j));
                columns.push(col.name.clone());
            }
            ColumnKind::Categorical => {
                let levels: BTreeSet<&str> = table.column(j).filter_map(Cell::as_text).collect();
                let levels: Vec<String> = levels.into_iter().map(str::to_string).collect();
                if drop_baseline && levels.len() < 2 {
                    report.dropped_zero_variance.push(col.name.clone());
                    continue;
                }
                let (baseline, kept) = if drop_baseline {
                    (Some(levels[0].clone()), levels[1..].to_vec())
                } else {
                    (None, levels)
                };
                let names: Vec<String> = kept.iter().map(|v| format!("{}={v}", col.name)).collect();
                columns.extend(names.iter().cloned());
                report.dummies.push(DummyMapping {
                    source: col.name.clone(),
                    baseline,
                    columns: names,
                });
                plans.push(Plan::Dummies(j, kept));
            }
            ColumnKind::Text | ColumnKind::Date => {
                report.skipped_non_numeric.push(col.name.clone())
            }
        }
    }
    if columns.is_empty() {
        return Err(Error::NoFeatures);
    }
    Ok((plans, columns, report))
}

fn fill_rows(table: &RawLoanTable, plans: &[Plan], n_cols: usize) -> Result<Vec<f64>> {
    let mut x = Vec::with_capacity(table.row_count() * n_cols);
    for (r, row) in table.rows().iter().enumerate() {
        for p in plans {
            match p {
                Plan::Numeric(j) => x.push(row[*j].as_number().ok_or_else(|| {
                    Error::InvalidInput(format!("row {r}: numeric cell expected"))
                })?),
                Plan::Dummies(j, levels) => {
                    let v = row[*j].as_text().unwrap_or("");
                    x.extend(levels.iter().map(|l| if l == v { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    Ok(x)
}

/// Encodes feature columns to a numeric matrix. A categorical feature with
/// `k` levels becomes `k - 1` dummy columns named `<col>=<level>`, using the
/// lexicographically first level as the baseline. The target column must
/// hold terminal statuses (see [`filter_terminal`](super::filter_terminal))
/// or literal 0/1 values.
pub fn encode(table: &RawLoanTable) -> Result<(DesignMatrix, EncodeReport)> {
    let target = table.target_index();
    let y = table
        .column(target)
        .enumerate()
        .map(|(r, c)| {
            let v = match c {
                Cell::Text(s) => status_target(s),
                Cell::Number(v) if *v == 0.0 || *v == 1.0 => Some(*v as u8),
                _ => None,
            };
            v.ok_or_else(|| {
                Error::InvalidInput(format!("row {r}: target is not a terminal status"))
            })
        })
        .collect::<Result<Vec<u8>>>()?;
    let (plans, columns, report) = plan(table, true)?;
    let x = fill_rows(table, &plans, columns.len())?;
    Ok((DesignMatrix::new(columns, x, y)?, report))
}

/// Encodes features with one dummy per observed level (no baseline) and no
/// target, so the result can be aligned to a trained model's columns.
pub fn encode_features(table: &RawLoanTable) -> Result<FeatureMatrix> {
    let (plans, columns, report) = plan(table, false)?;
    let x = fill_rows(table, &plans, columns.len())?;
    Ok(FeatureMatrix {
        n_rows: table.row_count(),
        n_cols: columns.len(),
        columns,
        x,
        categorical_sources: report.dummies.into_iter().map(|d| d.source).collect(),
    })
}
