//! Loan-table ingestion, cleaning, dummy encoding and train/test splitting.

mod clean;
mod encode;
mod load;
mod split;

pub use clean::{
    class_balance, drop_columns, filter_terminal, handle_missing, status_target, ClassBalance,
    MissingPolicy, TerminalReport, DEFAULT_DROP_COLUMNS,
};
pub use encode::{encode, encode_features, DummyMapping, EncodeReport, FeatureMatrix};
pub use load::{load_csv, read_column_spec};
pub use split::{split, SplitPair};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a raw cell is parsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Text,
    Date,
}

/// What the pipeline does with a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Target,
    ExposureAux,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
}

impl ColumnSpec {
    pub fn new(name: &str, kind: ColumnKind, role: ColumnRole) -> Self {
        Self {
            name: name.to_string(),
            kind,
            role,
        }
    }
}

/// Column spec for the accepted-loans file: the modelling features, the
/// loan status target, the columns the exposure calculations read, and the
/// five columns removed before modelling.
pub fn default_column_spec() -> Vec<ColumnSpec> {
    use ColumnKind::*;
    use ColumnRole::*;
    vec![
        ColumnSpec::new("id", Text, ExposureAux),
        ColumnSpec::new("loan_amnt", Numeric, Feature),
        ColumnSpec::new("term", Numeric, Feature),
        ColumnSpec::new("int_rate", Numeric, Feature),
        ColumnSpec::new("sub_grade", Categorical, Feature),
        ColumnSpec::new("purpose", Categorical, Feature),
        ColumnSpec::new("annual_inc", Numeric, Feature),
        ColumnSpec::new("dti", Numeric, Feature),
        ColumnSpec::new("open_acc", Numeric, Feature),
        ColumnSpec::new("total_acc", Numeric, Feature),
        ColumnSpec::new("fico_range_low", Numeric, Feature),
        ColumnSpec::new("loan_status", Categorical, Target),
        ColumnSpec::new("funded_amnt", Numeric, ExposureAux),
        ColumnSpec::new("total_rec_prncp", Numeric, ExposureAux),
        ColumnSpec::new("recoveries", Numeric, ExposureAux),
        ColumnSpec::new("last_pymnt_d", Date, ExposureAux),
        ColumnSpec::new("emp_title", Text, Drop),
        ColumnSpec::new("emp_length", Categorical, Drop),
        ColumnSpec::new("grade", Categorical, Drop),
        ColumnSpec::new("issue_d", Date, Drop),
        ColumnSpec::new("title", Text, Drop),
    ]
}

/// Checks name uniqueness and the single-target rule.
pub fn validate_spec(spec: &[ColumnSpec]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for col in spec {
        if !seen.insert(col.name.as_str()) {
            return Err(Error::Schema(format!("column `{}` listed twice", col.name)));
        }
    }
    let targets = spec.iter().filter(|c| c.role == ColumnRole::Target).count();
    if targets != 1 {
        return Err(Error::Schema(format!(
            "expected exactly one target column, found {targets}"
        )));
    }
    Ok(())
}

/// A parsed cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Number(f64),
    Text(String),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// Parsed loan rows. Every row holds one cell per schema column.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLoanTable {
    schema: Vec<ColumnSpec>,
    rows: Vec<Vec<Cell>>,
}

impl RawLoanTable {
    pub fn new(schema: Vec<ColumnSpec>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        validate_spec(&schema)?;
        if let Some(i) = rows.iter().position(|r| r.len() != schema.len()) {
            return Err(Error::Schema(format!(
                "row {i} has {} cells, schema has {}",
                rows[i].len(),
                schema.len()
            )));
        }
        Ok(Self { schema, rows })
    }

    pub fn schema(&self) -> &[ColumnSpec] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.schema
            .iter()
            .position(|c| c.role == ColumnRole::Target)
            .expect("validated schema has a target")
    }

    /// Cells of one column, top to bottom.
    pub fn column(&self, index: usize) -> impl Iterator<Item = &Cell> + '_ {
        self.rows.iter().map(move |r| &r[index])
    }

    pub fn missing_count(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .filter(|c| c.is_missing())
            .count()
    }

    pub(crate) fn from_parts_unchecked(schema: Vec<ColumnSpec>, rows: Vec<Vec<Cell>>) -> Self {
        Self { schema, rows }
    }
}

/// Numeric feature matrix with a binary default target (1 = charged off).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub columns: Vec<String>,
    /// Row-major, `n_rows * n_cols`.
    pub x: Vec<f64>,
    pub y: Vec<u8>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl DesignMatrix {
    pub fn new(columns: Vec<String>, x: Vec<f64>, y: Vec<u8>) -> Result<Self> {
        let n_cols = columns.len();
        let n_rows = y.len();
        if x.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                got: x.len(),
            });
        }
        if y.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput("target values must be 0 or 1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "design matrix holds a non-finite value".into(),
            ));
        }
        Ok(Self {
            columns,
            x,
            y,
            n_rows,
            n_cols,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact(0) panics, and a zero-column matrix has no addressable rows anyway
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.x[i * self.n_cols + j])
            .collect()
    }

    /// Rows `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> DesignMatrix {
        let mut x = Vec::with_capacity(indices.len() * self.n_cols);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        DesignMatrix {
            columns: self.columns.clone(),
            x,
            y,
            n_rows: indices.len(),
            n_cols: self.n_cols,
        }
    }
}
