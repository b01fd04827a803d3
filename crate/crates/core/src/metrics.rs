//! Binary classification metrics with class 1 (default) as the positive
//! class: confusion matrix, per-class precision/recall/F1 with macro and
//! support-weighted averages, ROC curve and AUC.
//!
//! Ratios whose denominator is zero are reported as 0 with `degenerate` set,
//! so a report can always be produced.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// A ratio metric, or 0 flagged `degenerate` when its denominator is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

impl Score {
    fn ratio(num: usize, den: usize) -> Score {
        if den == 0 {
            Score {
                value: 0.0,
                degenerate: true,
            }
        } else {
            Score {
                value: num as f64 / den as f64,
                degenerate: false,
            }
        }
    }
}

/// Harmonic mean `2PR / (P + R)`; degenerate when `P + R = 0`.
pub fn harmonic_f1(precision: f64, recall: f64) -> Score {
    let den = precision + recall;
    if den == 0.0 {
        Score {
            value: 0.0,
            degenerate: true,
        }
    } else {
        Score {
            value: 2.0 * precision * recall / den,
            degenerate: false,
        }
    }
}

fn check_labels(y_true: &[u8], other_len: usize) -> Result<()> {
    if y_true.len() != other_len {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: other_len,
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidInput("no samples to evaluate".into()));
    }
    if y_true.iter().any(|&v| v > 1) {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    Ok(())
}

/// Tallies predictions against truth.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    check_labels(y_true, y_pred.len())?;
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => return Err(Error::InvalidInput("predictions must be 0 or 1".into())),
        }
    }
    Ok(cm)
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> Score {
        Score::ratio(self.tp + self.tn, self.total())
    }

    /// The same outcomes with class 0 treated as positive.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }

    fn oriented(&self, class: u8) -> ConfusionMatrix {
        if class == 1 {
            *self
        } else {
            self.swapped()
        }
    }

    /// `TP / (TP + FP)` for `class`.
    pub fn precision(&self, class: u8) -> Score {
        let c = self.oriented(class);
        Score::ratio(c.tp, c.tp + c.fp)
    }

    /// `TP / (TP + FN)` for `class`.
    pub fn recall(&self, class: u8) -> Score {
        let c = self.oriented(class);
        Score::ratio(c.tp, c.tp + c.fn_)
    }

    pub fn f1(&self, class: u8) -> Score {
        let f = harmonic_f1(self.precision(class).value, self.recall(class).value);
        Score {
            value: f.value,
            degenerate: f.degenerate,
        }
    }

    /// `TN / (FP + TN)`, i.e. `1 - FPR`.
    pub fn specificity(&self) -> Score {
        Score::ratio(self.tn, self.fp + self.tn)
    }

    /// Rows tp/fn over fp/tn, actual class 1 first.
    pub fn render(&self) -> String {
        let w = [self.tp, self.tn, self.fp, self.fn_]
            .iter()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1)
            .max(6);
        format!(
            "{:>10} {:>w$} {:>w$}\n{:>10} {:>w$} {:>w$}\n{:>10} {:>w$} {:>w$}\n",
            "", "pred 0", "pred 1", "actual 0", self.tn, self.fp, "actual 1", self.fn_, self.tp
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: Score,
    pub recall: Score,
    pub f1: Score,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class scores, accuracy and averages for both classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class_0: ClassScores,
    pub class_1: ClassScores,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub confusion: ConfusionMatrix,
    pub total: usize,
}

/// Builds the full report for hard predictions.
pub fn report(y_true: &[u8], y_pred: &[u8]) -> Result<ClassificationReport> {
    let cm = confusion(y_true, y_pred)?;
    Ok(ClassificationReport::from_confusion(cm))
}

impl ClassificationReport {
    pub fn from_confusion(cm: ConfusionMatrix) -> Self {
        let class = |c: u8, support: usize| ClassScores {
            precision: cm.precision(c),
            recall: cm.recall(c),
            f1: cm.f1(c),
            support,
        };
        let class_0 = class(0, cm.tn + cm.fp);
        let class_1 = class(1, cm.tp + cm.fn_);
        let total = cm.total();
        let (w0, w1) = (
            class_0.support as f64 / total as f64,
            class_1.support as f64 / total as f64,
        );
        let avg = |a: f64, b: f64, wa: f64, wb: f64| wa * a + wb * b;
        let combine = |wa: f64, wb: f64| Averages {
            precision: avg(class_0.precision.value, class_1.precision.value, wa, wb),
            recall: avg(class_0.recall.value, class_1.recall.value, wa, wb),
            f1: avg(class_0.f1.value, class_1.f1.value, wa, wb),
        };
        ClassificationReport {
            class_0,
            class_1,
            accuracy: cm.accuracy().value,
            macro_avg: combine(0.5, 0.5),
            weighted_avg: combine(w0, w1),
            confusion: cm,
            total,
        }
    }

    /// Every displayed entry, rounded to two decimals, row by row
    /// (precision, recall, f1) and column by column (0, 1, accuracy, macro,
    /// weighted).
    pub fn rounded_grid(&self) -> [[f64; 5]; 3] {
        let r = |v: f64| (v * 100.0).round() / 100.0;
        let row = |a: f64, b: f64, m: f64, w: f64| [r(a), r(b), r(self.accuracy), r(m), r(w)];
        [
            row(
                self.class_0.precision.value,
                self.class_1.precision.value,
                self.macro_avg.precision,
                self.weighted_avg.precision,
            ),
            row(
                self.class_0.recall.value,
                self.class_1.recall.value,
                self.macro_avg.recall,
                self.weighted_avg.recall,
            ),
            row(
                self.class_0.f1.value,
                self.class_1.f1.value,
                self.macro_avg.f1,
                self.weighted_avg.f1,
            ),
        ]
    }

    /// Plain-text table, two decimals, with notes for degenerate cells.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10}{:>8}{:>8}{:>10}{:>11}{:>14}",
            "", "0.0", "1.0", "accuracy", "macro avg", "weighted avg"
        );
        for (label, row) in ["precision", "recall", "f1-score"]
            .iter()
            .zip(self.rounded_grid())
        {
            let _ = writeln!(
                out,
                "{:<10}{:>8.2}{:>8.2}{:>10.2}{:>11.2}{:>14.2}",
                label, row[0], row[1], row[2], row[3], row[4]
            );
        }
        let _ = writeln!(
            out,
            "{:<10}{:>8}{:>8}{:>10}",
            "support", self.class_0.support, self.class_1.support, self.total
        );
        for (c, s) in [(0, &self.class_0), (1, &self.class_1)] {
            for (name, score) in [
                ("precision", s.precision),
                ("recall", s.recall),
                ("f1-score", s.f1),
            ] {
                if score.degenerate {
                    let _ = writeln!(
                        out,
                        "note: {name} of class {c} is undefined (0/0), shown as 0"
                    );
                }
            }
        }
        out
    }
}

/// ROC curve over every distinct score. `thresholds[i]` is the cut giving
/// `points[i]` (predict 1 when `score >= threshold`); the first point is the
/// everything-negative sentinel at `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    #[serde(skip)]
    pub thresholds: Vec<f64>,
    pub auc: f64,
}

impl RocCurve {
    /// `fpr,tpr` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (fpr, tpr) in &self.points {
            let _ = writeln!(out, "{fpr},{tpr}");
        }
        out
    }
}

/// Sweeps the threshold from above the highest score to the lowest; tied
/// scores move together. The area is the trapezoidal integral, accumulated
/// exactly in integer counts before the final division.
pub fn roc(y_true: &[u8], scores: &[f64]) -> Result<RocCurve> {
    check_labels(y_true, scores.len())?;
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidInput(format!("score {s} is outside [0, 1]")));
    }
    let n1 = y_true.iter().filter(|&&v| v == 1).count();
    let n0 = y_true.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::InvalidInput("ROC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    // twice the area, in units of 1 / (n0 * n1)
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut gtp, mut gfp) = (0usize, 0usize);
        while i < order.len() && scores[order[i]] == s {
            if y_true[order[i]] == 1 {
                gtp += 1
            } else {
                gfp += 1
            }
            i += 1;
        }
        area2 += gfp as u128 * (2 * tp + gtp) as u128;
        tp += gtp;
        fp += gfp;
        points.push((fp as f64 / n0 as f64, tp as f64 / n1 as f64));
        thresholds.push(s);
    }
    let auc = area2 as f64 / (2 * n0 as u128 * n1 as u128) as f64;
    Ok(RocCurve {
        points,
        thresholds,
        auc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn confusion_cases() {
        assert_eq!(
            confusion(&[1, 0], &[1, 0]).unwrap(),
            ConfusionMatrix {
                tp: 1,
                tn: 1,
                fp: 0,
                fn_: 0
            }
        );
        assert_eq!(
            confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap(),
            ConfusionMatrix {
                tp: 1,
                tn: 1,
                fp: 1,
                fn_: 1
            }
        );
        assert!(confusion(&[1], &[1, 0]).is_err());
        assert!(confusion(&[2], &[1]).is_err());
        assert!(confusion(&[1], &[3]).is_err());
    }

    #[test]
    fn precision_recall_cases() {
        let cm = ConfusionMatrix {
            tp: 1,
            tn: 0,
            fp: 0,
            fn_: 0,
        };
        assert_eq!(cm.precision(1).value, 1.0);
        assert_eq!(cm.recall(1).value, 1.0);
        assert_eq!(cm.f1(1).value, 1.0);
        let cm = ConfusionMatrix {
            tp: 0,
            tn: 0,
            fp: 0,
            fn_: 5,
        };
        assert_eq!(
            cm.recall(1),
            Score {
                value: 0.0,
                degenerate: false
            }
        );
        assert!(cm.precision(1).degenerate);
        assert!(cm.f1(1).degenerate);
    }

    #[test]
    fn f1_of_precision_065_recall_095() {
        let f = harmonic_f1(0.65, 0.95);
        assert_abs_diff_eq!(f.value, 0.771_875, epsilon = 1e-12);
        assert_eq!((f.value * 100.0).round() / 100.0, 0.77);
    }

    #[test]
    fn specificity_cases() {
        assert_eq!(
            ConfusionMatrix {
                tp: 2,
                tn: 4,
                fp: 0,
                fn_: 1
            }
            .specificity()
            .value,
            1.0
        );
        assert_eq!(
            ConfusionMatrix {
                tp: 2,
                tn: 0,
                fp: 3,
                fn_: 1
            }
            .specificity()
            .value,
            0.0
        );
        assert_eq!(
            ConfusionMatrix {
                tp: 0,
                tn: 3,
                fp: 1,
                fn_: 0
            }
            .specificity()
            .value,
            0.75
        );
        assert!(
            ConfusionMatrix {
                tp: 1,
                tn: 0,
                fp: 0,
                fn_: 0
            }
            .specificity()
            .degenerate
        );
    }

    #[test]
    fn perfect_report_is_all_ones() {
        let y = [0, 1, 1, 0, 0];
        let r = report(&y, &y).unwrap();
        assert!(r.rounded_grid().iter().flatten().all(|&v| v == 1.0));
        assert!(!r.render_text().contains("note:"));
    }

    #[test]
    fn weighted_and_macro_from_supports() {
        // supports (8, 2); class 0 recall 1.0, class 1 recall 0.5
        let y_true = [0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
        let y_pred = [0, 0, 0, 0, 0, 0, 0, 0, 1, 0];
        let r = report(&y_true, &y_pred).unwrap();
        assert_eq!((r.class_0.recall.value, r.class_1.recall.value), (1.0, 0.5));
        assert_abs_diff_eq!(r.weighted_avg.recall, 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(r.macro_avg.recall, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn single_class_flags_absent_class() {
        let r = report(&[0, 0, 0], &[0, 0, 0]).unwrap();
        assert!(r.class_1.precision.degenerate && r.class_1.recall.degenerate);
        assert!(r.render_text().contains("class 1 is undefined"));
    }

    #[test]
    fn render_layout() {
        let r = report(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap();
        let text = r.render_text();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].contains("0.0") && lines[0].contains("weighted avg"));
        assert!(lines[1].starts_with("precision"));
        assert!(lines[2].starts_with("recall"));
        assert!(lines[3].starts_with("f1-score"));
    }

    #[test]
    fn roc_cases() {
        let r = roc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert_eq!(r.auc, 1.0);
        let r = roc(&[0, 1, 0, 1], &[0.5; 4]).unwrap();
        assert_eq!(r.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(r.auc, 0.5);
        assert!(roc(&[1, 1], &[0.2, 0.3]).is_err());
        assert!(roc(&[0, 1], &[0.2, 1.3]).is_err());
        assert!(r.to_csv().starts_with("fpr,tpr\n0,0\n"));
    }
}
