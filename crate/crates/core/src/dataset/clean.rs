use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Cell, ColumnKind, ColumnRole, RawLoanTable};
use crate::error::{Error, Result};

/// Columns removed before modelling: employer and loan titles, employment
/// length, the letter grade (redundant with `sub_grade`) and the issue date.
pub const DEFAULT_DROP_COLUMNS: &[&str] = &["emp_title", "emp_length", "grade", "issue_d", "title"];

const POLICY_PREFIX: &str = "Does not meet the credit policy. Status:";

/// Maps a terminal loan status to the default target: `Fully Paid` -> 0,
/// `Charged Off` -> 1. Any other status is non-terminal.
pub fn status_target(status: &str) -> Option<u8> {
    let s = status.trim();
    let s = s.strip_prefix(POLICY_PREFIX).unwrap_or(s).trim();
    match s {
        "Fully Paid" => Some(0),
        "Charged Off" => Some(1),
        _ => None,
    }
}

/// Status tallies from [`filter_terminal`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalReport {
    pub fully_paid: usize,
    pub charged_off: usize,
    /// Non-terminal statuses and how many rows each removed.
    pub dropped: BTreeMap<String, usize>,
}

/// Keeps only fully-paid and charged-off loans.
pub fn filter_terminal(table: &RawLoanTable) -> Result<(RawLoanTable, TerminalReport)> {
    let target = table.target_index();
    let mut report = TerminalReport::default();
    let mut rows = Vec::new();
    for row in table.rows() {
        let status = row[target].as_text().unwrap_or("");
        match status_target(status) {
            Some(0) => report.fully_paid += 1,
            Some(_) => report.charged_off += 1,
            None => {
                let key = if row[target].is_missing() {
                    "<missing>"
                } else {
                    status
                };
                *report.dropped.entry(key.to_string()).or_default() += 1;
                continue;
            }
        }
        rows.push(row.clone());
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(
            "no fully-paid or charged-off loans in the table".into(),
        ));
    }
    Ok((
        RawLoanTable::from_parts_unchecked(table.schema().to_vec(), rows),
        report,
    ))
}

/// Removes the named columns from schema and rows.
pub fn drop_columns(table: &RawLoanTable, names: &[&str]) -> Result<RawLoanTable> {
    let mut remove = vec![false; table.schema().len()];
    for name in names {
        let i = table
            .column_index(name)
            .ok_or_else(|| Error::Schema(format!("cannot drop unknown column `{name}`")))?;
        if table.schema()[i].role == ColumnRole::Target {
            return Err(Error::Schema(format!("cannot drop target column `{name}`")));
        }
        remove[i] = true;
    }
    let schema: Vec<_> = table
        .schema()
        .iter()
        .zip(&remove)
        .filter(|(_, &r)| !r)
        .map(|(c, _)| c.clone())
        .collect();
    if !schema.iter().any(|c| c.role == ColumnRole::Feature) {
        return Err(Error::NoFeatures);
    }
    let rows = table
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(&remove)
                .filter(|(_, &r)| !r)
                .map(|(c, _)| c.clone())
                .collect()
        })
        .collect();
    Ok(RawLoanTable::from_parts_unchecked(schema, rows))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    DropRow,
    #[default]
    FillMedianOrMode,
}

/// Resolves missing feature cells. Rows with a missing target are always
/// removed; auxiliary and dropped columns are left untouched.
pub fn handle_missing(table: &RawLoanTable, policy: MissingPolicy) -> Result<RawLoanTable> {
    if table.row_count() == 0 {
        return Err(Error::EmptyDataset(
            "cannot resolve missing values of an empty table".into(),
        ));
    }
    let target = table.target_index();
    let features: Vec<usize> = table
        .schema()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.role == ColumnRole::Feature)
        .map(|(i, _)| i)
        .collect();
    let labelled = table.rows().iter().filter(|r| !r[target].is_missing());

    let rows: Vec<Vec<Cell>> = match policy {
        MissingPolicy::DropRow => labelled
            .filter(|r| features.iter().all(|&j| !r[j].is_missing()))
            .cloned()
            .collect(),
        MissingPolicy::FillMedianOrMode => {
            let labelled: Vec<&Vec<Cell>> = labelled.collect();
            let mut fills: Vec<(usize, Cell)> = Vec::new();
            for &j in &features {
                if labelled.iter().all(|r| !r[j].is_missing()) {
                    continue;
                }
                let col = &table.schema()[j];
                let fill = match col.kind {
                    ColumnKind::Numeric => {
                        median(labelled.iter().filter_map(|r| r[j].as_number())).map(Cell::Number)
                    }
                    _ => mode(labelled.iter().filter_map(|r| r[j].as_text()))
                        .map(|s| Cell::Text(s.to_string())),
                };
                let fill = fill.ok_or_else(|| Error::UnresolvableColumn(col.name.clone()))?;
                fills.push((j, fill));
            }
            labelled
                .into_iter()
                .map(|r| {
                    let mut r = r.clone();
                    for (j, fill) in &fills {
                        if r[*j].is_missing() {
                            r[*j] = fill.clone();
                        }
                    }
                    r
                })
                .collect()
        }
    };
    Ok(RawLoanTable::from_parts_unchecked(
        table.schema().to_vec(),
        rows,
    ))
}

fn median(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

/// Most frequent value; ties go to the lexicographically first.
fn mode<'a>(values: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (v, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((v, c));
        }
    }
    best.map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBalance {
    pub count0: usize,
    pub count1: usize,
    pub w0: f64,
    pub w1: f64,
}

/// Class counts and support weights.
pub fn class_balance(y: &[u8]) -> Result<ClassBalance> {
    if y.is_empty() {
        return Err(Error::InvalidInput(
            "class balance of an empty label vector".into(),
        ));
    }
    let count1 = y.iter().filter(|&&v| v == 1).count();
    let count0 = y.len() - count1;
    let n = y.len() as f64;
    Ok(ClassBalance {
        count0,
        count1,
        w0: count0 as f64 / n,
        w1: count1 as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ColumnSpec;

    fn table(rows: Vec<Vec<Cell>>) -> RawLoanTable {
        let schema = vec![
            ColumnSpec::new("amt", ColumnKind::Numeric, ColumnRole::Feature),
            ColumnSpec::new("purpose", ColumnKind::Categorical, ColumnRole::Feature),
            ColumnSpec::new("status", ColumnKind::Categorical, ColumnRole::Target),
            ColumnSpec::new("emp_title", ColumnKind::Text, ColumnRole::Drop),
        ];
        RawLoanTable::new(schema, rows).unwrap()
    }

    fn n(v: f64) -> Cell {
        Cell::Number(v)
    }
    fn t(s: &str) -> Cell {
        Cell::Text(s.into())
    }

    #[test]
    fn terminal_statuses() {
        let tb = table(vec![
            vec![n(1.), t("a"), t("Fully Paid"), t("x")],
            vec![n(2.), t("a"), t("Current"), t("x")],
            vec![n(3.), t("b"), t("Charged Off"), t("x")],
        ]);
        let (f, report) = filter_terminal(&tb).unwrap();
        assert_eq!(f.row_count(), 2);
        let targets: Vec<u8> = f
            .column(2)
            .map(|c| status_target(c.as_text().unwrap()).unwrap())
            .collect();
        assert_eq!(targets, vec![0, 1]);
        assert_eq!(report.dropped["Current"], 1);
    }

    #[test]
    fn all_current_is_empty_dataset() {
        let tb = table(vec![vec![n(1.), t("a"), t("Current"), t("x")]]);
        assert!(matches!(filter_terminal(&tb), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn ten_mixed_statuses() {
        let statuses = [
            "Fully Paid",
            "Current",
            "Charged Off",
            "Late (31-120 days)",
            "Fully Paid",
            "In Grace Period",
            "Does not meet the credit policy. Status:Charged Off",
            "Default",
            "Fully Paid",
            "Current",
        ];
        // hand count: 3 fully paid + 2 charged off
        let tb = table(
            statuses
                .iter()
                .map(|s| vec![n(1.), t("a"), t(s), t("x")])
                .collect(),
        );
        let (f, report) = filter_terminal(&tb).unwrap();
        assert_eq!(f.row_count(), 5);
        assert_eq!((report.fully_paid, report.charged_off), (3, 2));
    }

    #[test]
    fn drop_named_columns() {
        let tb = table(vec![vec![n(1.), t("a"), t("Fully Paid"), t("x")]]);
        assert_eq!(drop_columns(&tb, &["emp_title"]).unwrap().schema().len(), 3);
        assert_eq!(drop_columns(&tb, &[]).unwrap(), tb);
        assert!(matches!(
            drop_columns(&tb, &["nope"]),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            drop_columns(&tb, &["amt", "purpose"]),
            Err(Error::NoFeatures)
        ));
    }

    #[test]
    fn drop_row_policy() {
        let tb = table(vec![
            vec![n(1.), t("a"), t("Fully Paid"), t("x")],
            vec![Cell::Missing, t("a"), t("Fully Paid"), t("x")],
            vec![n(3.), t("b"), t("Charged Off"), Cell::Missing],
        ]);
        let out = handle_missing(&tb, MissingPolicy::DropRow).unwrap();
        assert_eq!(out.row_count(), 2);
    }

    #[test]
    fn fill_median_and_mode() {
        let tb = table(vec![
            vec![n(1.), t("a"), t("Fully Paid"), t("x")],
            vec![Cell::Missing, t("a"), t("Fully Paid"), t("x")],
            vec![n(3.), t("b"), t("Charged Off"), t("x")],
            vec![n(3.), Cell::Missing, t("Charged Off"), t("x")],
        ]);
        let out = handle_missing(&tb, MissingPolicy::FillMedianOrMode).unwrap();
        // median of {1, 3, 3} is 3; mode of {a, a, b} is a
        assert_eq!(out.rows()[1][0], n(3.));
        assert_eq!(out.rows()[3][1], t("a"));
        assert_eq!(out.missing_count(), 0);
    }

    #[test]
    fn median_of_two_is_their_mean() {
        assert_eq!(median([1.0, 3.0].into_iter()), Some(2.0));
        assert_eq!(mode(["b", "a"].into_iter()), Some("a"));
    }

    #[test]
    fn fully_missing_column_is_unresolvable() {
        let tb = table(vec![vec![Cell::Missing, t("a"), t("Fully Paid"), t("x")]]);
        assert!(matches!(
            handle_missing(&tb, MissingPolicy::FillMedianOrMode),
            Err(Error::UnresolvableColumn(c)) if c == "amt"
        ));
    }

    #[test]
    fn balance() {
        assert_eq!(
            class_balance(&[0, 0, 0, 1]).unwrap(),
            ClassBalance {
                count0: 3,
                count1: 1,
                w0: 0.75,
                w1: 0.25
            }
        );
        let b = class_balance(&[0; 7]).unwrap();
        assert_eq!((b.count0, b.count1, b.w0, b.w1), (7, 0, 1.0, 0.0));
        assert!(class_balance(&[]).is_err());
    }
}
