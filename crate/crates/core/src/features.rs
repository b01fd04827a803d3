//! Feature statistics: correlation of each encoded feature with the default
//! target, threshold counts over raw columns, and standardization.

use serde::{Deserialize, Serialize};

use crate::dataset::{DesignMatrix, RawLoanTable};
use crate::error::{Error, Result};
use crate::par;

/// Pearson coefficient; `undefined` is set (and `r` is 0) when either input
/// has zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub undefined: bool,
}

/// Sample Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "correlation needs at least two points".into(),
        ));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // the (n - 1) normalisers of covariance and both variances cancel
    let cov = sxy / (nf - 1.0);
    let (vx, vy) = (sxx / (nf - 1.0), syy / (nf - 1.0));
    if vx == 0.0 || vy == 0.0 {
        return Ok(Correlation {
            r: 0.0,
            undefined: true,
        });
    }
    let r = (cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        undefined: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub feature: String,
    pub r: f64,
    pub undefined: bool,
}

/// Feature-target correlations, sorted by descending `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationReport {
    /// `feature,r` CSV for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,r\n");
        for e in &self.entries {
            out.push_str(&csv_field(&e.feature));
            out.push(',');
            out.push_str(&e.r.to_string());
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Correlates every column with the target. Ties in `r` keep column order.
pub fn correlation_report(m: &DesignMatrix) -> Result<CorrelationReport> {
    if m.n_rows < 2 {
        return Err(Error::InvalidInput(
            "correlation report needs at least two rows".into(),
        ));
    }
    let y: Vec<f64> = m.y.iter().map(|&v| v as f64).collect();
    let correlations = par::map_range(m.n_cols, |j| pearson(&m.column_values(j), &y));
    let mut entries = m
        .columns
        .iter()
        .zip(correlations)
        .map(|(name, c)| {
            c.map(|c| CorrelationEntry {
                feature: name.clone(),
                r: c.r,
                undefined: c.undefined,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| b.r.total_cmp(&a.r));
    Ok(CorrelationReport { entries })
}

/// How many rows of a numeric column exceed a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub column: String,
    pub above: f64,
    pub count: usize,
}

/// Counts non-missing cells of `column` strictly greater than `above`.
pub fn count_above(table: &RawLoanTable, column: &str, above: f64) -> Result<ThresholdCount> {
    let j = table
        .column_index(column)
        .ok_or_else(|| Error::Schema(format!("no column `{column}` to count")))?;
    let count = table
        .column(j)
        .filter_map(|c| c.as_number())
        .filter(|&v| v > above)
        .count();
    Ok(ThresholdCount {
        column: column.to_string(),
        above,
        count,
    })
}

/// Per-column mean and population standard deviation. Columns with zero
/// spread pass through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(m: &DesignMatrix) -> Scaler {
        let n = m.n_rows.max(1) as f64;
        let stats = par::map_range(m.n_cols, |j| {
            let col = m.column_values(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (mean, var.sqrt())
        });
        let (means, stds) = stats.into_iter().unzip();
        Scaler { means, stds }
    }

    pub fn is_pass_through(&self, j: usize) -> bool {
        self.stds[j] == 0.0
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.is_pass_through(j) {
                    v
                } else {
                    (v - self.means[j]) / self.stds[j]
                }
            })
            .collect()
    }

    /// Applies the fitted parameters to `m`.
    pub fn apply(&self, m: &DesignMatrix) -> Result<DesignMatrix> {
        if m.n_cols != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: m.n_cols,
            });
        }
        let x = m.rows().flat_map(|r| self.transform_row(r)).collect();
        DesignMatrix::new(m.columns.clone(), x, m.y.clone())
    }
}

pub fn fit_scaler(m: &DesignMatrix) -> Scaler {
    Scaler::fit(m)
}

pub fn apply_scaler(s: &Scaler, m: &DesignMatrix) -> Result<DesignMatrix> {
    s.apply(m)
}
