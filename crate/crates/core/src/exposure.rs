//! Exposure at default, recovery rates from charged-off loans, loss given
//! default and expected loss.
//!
//! LGD appears in two forms: the loss fraction `1 - R` and the currency
//! amount `EAD * (1 - R)`. Expected loss is `PD * EAD * (1 - R)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{status_target, Cell, RawLoanTable};
use crate::error::{Error, Result};

/// Source columns for [`loan_records`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExposureColumns {
    /// Loan identifier; row numbers are used when absent from the table.
    pub id: String,
    pub purpose: String,
    pub status: String,
    pub funded_amount: String,
    pub principal_received: String,
    /// Note rate in percent per annum.
    pub interest_rate: String,
    /// Contract term in months.
    pub term: String,
    pub recoveries: String,
    /// Issue month; with `as_of_date` it gives the elapsed term.
    pub issue_date: Option<String>,
    pub as_of_date: Option<String>,
}

impl Default for ExposureColumns {
    fn default() -> Self {
        Self {
            id: "id".into(),
            purpose: "purpose".into(),
            status: "loan_status".into(),
            funded_amount: "funded_amnt".into(),
            principal_received: "total_rec_prncp".into(),
            interest_rate: "int_rate".into(),
            term: "term".into(),
            recoveries: "recoveries".into(),
            issue_date: Some("issue_d".into()),
            as_of_date: Some("last_pymnt_d".into()),
        }
    }
}

/// Exposure-relevant fields of one loan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoanRecord {
    pub id: String,
    pub purpose: String,
    /// 1 charged off, 0 fully paid, `None` for any other status.
    pub target: Option<u8>,
    pub funded_amount: f64,
    pub principal_received: f64,
    /// Fraction per annum (0.10 for 10%).
    pub note_rate: f64,
    pub term_months: f64,
    pub elapsed_months: f64,
    pub recoveries: f64,
}

impl LoanRecord {
    /// Whole months left on the contract.
    pub fn remaining_months(&self) -> f64 {
        (self.term_months - self.elapsed_months).max(0.0).floor()
    }
}

/// Month index (`year * 12 + month - 1`) of `Mon-YYYY` or `YYYY-MM[-DD]`.
pub fn parse_month(s: &str) -> Option<i64> {
    const MONTHS: [&str; 12] = [
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
    ];
    let s = s.trim();
    if let Some((mon, year)) = s.split_once('-') {
        let lower = mon.to_ascii_lowercase();
        if let Some(m) = MONTHS.iter().position(|&n| n == lower) {
            let year: i64 = year.trim().parse().ok()?;
            return Some(year * 12 + m as i64);
        }
    }
    let mut parts = s.split('-');
    let year: i64 = parts.next()?.parse().ok()?;
    let month: i64 = parts.next()?.parse().ok()?;
    (1..=12).contains(&month).then_some(year * 12 + month - 1)
}

/// Reads one [`LoanRecord`] per table row.
pub fn loan_records(table: &RawLoanTable, cols: &ExposureColumns) -> Result<Vec<LoanRecord>> {
    let need = |name: &str| {
        table
            .column_index(name)
            .ok_or_else(|| Error::MissingExposureColumn(name.to_string()))
    };
    let purpose = need(&cols.purpose)?;
    let status = need(&cols.status)?;
    let funded = need(&cols.funded_amount)?;
    let received = need(&cols.principal_received)?;
    let rate = need(&cols.interest_rate)?;
    let term = need(&cols.term)?;
    let recoveries = need(&cols.recoveries)?;
    let id = table.column_index(&cols.id);
    let dates = match (&cols.issue_date, &cols.as_of_date) {
        (Some(a), Some(b)) => table.column_index(a).zip(table.column_index(b)),
        _ => None,
    };

    let number = |row: &[Cell], j: usize, r: usize, name: &str| {
        row[j]
            .as_number()
            .ok_or_else(|| Error::InvalidInput(format!("row {r}: `{name}` is not a number")))
    };
    table
        .rows()
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let id = match id.map(|j| &row[j]) {
                Some(Cell::Text(s)) => s.clone(),
                Some(Cell::Number(v)) => v.to_string(),
                _ => r.to_string(),
            };
            let elapsed_months = dates
                .and_then(|(a, b)| {
                    let start = parse_month(row[a].as_text()?)?;
                    let end = parse_month(row[b].as_text()?)?;
                    Some((end - start).max(0) as f64)
                })
                .unwrap_or(0.0);
            Ok(LoanRecord {
                id,
                purpose: row[purpose].as_text().unwrap_or("").to_string(),
                target: row[status].as_text().and_then(status_target),
                funded_amount: number(row, funded, r, &cols.funded_amount)?,
                principal_received: row[received].as_number().unwrap_or(0.0),
                note_rate: number(row, rate, r, &cols.interest_rate)? / 100.0,
                term_months: number(row, term, r, &cols.term)?,
                elapsed_months,
                recoveries: row[recoveries].as_number().unwrap_or(0.0),
            })
        })
        .collect()
}

/// Exposure at default, with a flag when the outstanding balance came out
/// negative and was clamped to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ead {
    pub amount: f64,
    pub clamped: bool,
}

/// Outstanding principal plus simple interest at the note rate over the
/// remaining whole months.
pub fn ead(record: &LoanRecord) -> Ead {
    let outstanding = record.funded_amount - record.principal_received;
    let clamped = outstanding < 0.0;
    let outstanding = outstanding.max(0.0);
    let years = record.remaining_months() / 12.0;
    Ead {
        amount: outstanding * (1.0 + record.note_rate * years),
        clamped,
    }
}

/// Recovery rate per loan purpose plus a pooled fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTable {
    pub entries: BTreeMap<String, f64>,
    pub overall_rate: f64,
}

impl RecoveryTable {
    pub fn rate_for(&self, purpose: &str) -> f64 {
        self.entries
            .get(purpose)
            .copied()
            .unwrap_or(self.overall_rate)
    }
}

/// `sum(recoveries) / sum(EAD)` over charged-off loans, per purpose and
/// overall, clamped to `[0, 1]`. Purposes without exposure use the overall
/// rate.
pub fn recovery_rates(records: &[LoanRecord]) -> Result<RecoveryTable> {
    let mut by_purpose: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let (mut rec, mut exp) = (0.0, 0.0);
    let mut charged_off = 0usize;
    for r in records.iter().filter(|r| r.target == Some(1)) {
        charged_off += 1;
        let e = ead(r).amount;
        let slot = by_purpose.entry(r.purpose.as_str()).or_default();
        slot.0 += r.recoveries;
        slot.1 += e;
        rec += r.recoveries;
        exp += e;
    }
    if charged_off == 0 {
        return Err(Error::EmptyDataset(
            "no charged-off loans to estimate recovery from".into(),
        ));
    }
    if exp <= 0.0 {
        return Err(Error::InvalidInput(
            "charged-off loans carry no exposure".into(),
        ));
    }
    let overall_rate = (rec / exp).clamp(0.0, 1.0);
    let entries = by_purpose
        .into_iter()
        .map(|(p, (r, e))| {
            let rate = if e > 0.0 {
                (r / e).clamp(0.0, 1.0)
            } else {
                overall_rate
            };
            (p.to_string(), rate)
        })
        .collect();
    Ok(RecoveryTable {
        entries,
        overall_rate,
    })
}

/// Loss amount `ead * (1 - recovery_rate)`.
pub fn lgd(ead: f64, recovery_rate: f64) -> f64 {
    ead * (1.0 - recovery_rate)
}

/// `pd * ead * (1 - recovery_rate)`.
pub fn expected_loss(pd: f64, ead: f64, recovery_rate: f64) -> f64 {
    pd * lgd(ead, recovery_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureQuote {
    pub pd: f64,
    pub ead: f64,
    pub recovery_rate: f64,
    pub lgd_amount: f64,
    pub el: f64,
}

impl ExposureQuote {
    pub fn new(pd: f64, ead: f64, recovery_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pd) {
            return Err(Error::InvalidInput(format!("PD {pd} is outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&recovery_rate) {
            return Err(Error::InvalidInput(format!(
                "recovery rate {recovery_rate} is outside [0, 1]"
            )));
        }
        if !(ead >= 0.0 && ead.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "EAD {ead} must be finite and non-negative"
            )));
        }
        let lgd_amount = lgd(ead, recovery_rate);
        Ok(Self {
            pd,
            ead,
            recovery_rate,
            lgd_amount,
            el: pd * lgd_amount,
        })
    }
}
