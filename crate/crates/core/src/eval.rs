//! Binary classification metrics and model comparison tables.
//!
//! Metrics are percentages. Undefined ratios (0/0) are reported as 0.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annotate::SentimentLabel;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same matrix with Negative treated as the positive class.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

pub fn confusion(
    predictions: &[SentimentLabel],
    gold: &[SentimentLabel],
) -> Result<ConfusionMatrix> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let mut cm = ConfusionMatrix::default();
    for (p, g) in predictions.iter().zip(gold) {
        match (p.is_positive(), g.is_positive()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Weighted,
    Macro,
}

impl FromStr for Averaging {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "weighted" => Ok(Averaging::Weighted),
            "macro" => Ok(Averaging::Macro),
            other => Err(format!(
                "unknown averaging {other:?} (expected weighted or macro)"
            )),
        }
    }
}

impl std::fmt::Display for Averaging {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Averaging::Weighted => "weighted",
            Averaging::Macro => "macro",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: SentimentLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold instances of this class.
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: String,
    pub averaging: Averaging,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub per_class: [ClassMetrics; 2],
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn class_metrics(label: SentimentLabel, tp: u64, fp: u64, fn_: u64) -> ClassMetrics {
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    ClassMetrics {
        label,
        precision: 100.0 * precision,
        recall: 100.0 * recall,
        f1: 100.0 * harmonic(precision, recall),
        support: tp + fn_,
    }
}

/// Accuracy plus averaged precision, recall and F1 over both classes.
///
/// Weighted averaging weights each class by its gold support; macro
/// averaging weights them equally.
pub fn metrics(cm: &ConfusionMatrix, averaging: Averaging) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let pos = class_metrics(SentimentLabel::Positive, cm.tp, cm.fp, cm.fn_);
    let neg = class_metrics(SentimentLabel::Negative, cm.tn, cm.fn_, cm.fp);
    let n = total as f64;
    let (recall, precision, f1) = match averaging {
        // support_c * recall_c = tp_c, so the weighted recall is exactly
        // the accuracy.
        Averaging::Weighted => {
            let weighted = |f: fn(&ClassMetrics) -> f64| {
                (pos.support as f64 * f(&pos) + neg.support as f64 * f(&neg)) / n
            };
            (
                100.0 * ratio(cm.tp + cm.tn, total),
                weighted(|c| c.precision),
                weighted(|c| c.f1),
            )
        }
        Averaging::Macro => {
            let mean = |f: fn(&ClassMetrics) -> f64| (f(&pos) + f(&neg)) / 2.0;
            (mean(|c| c.recall), mean(|c| c.precision), mean(|c| c.f1))
        }
    };
    Ok(MetricsReport {
        model: String::new(),
        averaging,
        accuracy: 100.0 * ratio(cm.tp + cm.tn, total),
        recall,
        precision,
        f1,
        per_class: [pos, neg],
        confusion: *cm,
    })
}

/// Confusion matrix and metrics in one go, named after `model`.
pub fn evaluate(
    model: &str,
    predictions: &[SentimentLabel],
    gold: &[SentimentLabel],
    averaging: Averaging,
) -> Result<MetricsReport> {
    let cm = confusion(predictions, gold)?;
    let mut report = metrics(&cm, averaging)?;
    report.model = model.to_string();
    Ok(report)
}

/// Reports ordered best first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<MetricsReport>,
}

/// Sorts by F1 descending, then accuracy descending. Equal rows keep
/// their input order.
pub fn compare(reports: &[MetricsReport]) -> Comparison {
    let mut rows = reports.to_vec();
    rows.sort_by(|a, b| {
        b.f1.total_cmp(&a.f1)
            .then(b.accuracy.total_cmp(&a.accuracy))
    });
    Comparison { rows }
}

impl Comparison {
    /// Aligned text table with metrics to two decimals.
    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.model.chars().count())
            .chain(std::iter::once(5))
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>9}  {:>8}",
            "Model", "Accuracy", "Recall", "Precision", "F1"
        );
        let _ = writeln!(out, "{}", "-".repeat(width + 41));
        for r in &self.rows {
            let pad = width - r.model.chars().count();
            let _ = writeln!(
                out,
                "{}{}  {:>8.2}  {:>8.2}  {:>9.2}  {:>8.2}",
                r.model,
                " ".repeat(pad),
                r.accuracy,
                r.recall,
                r.precision,
                r.f1
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::{Negative as N, Positive as P};

    #[test]
    fn worked_example() {
        let cm = ConfusionMatrix::new(50, 10, 20, 20);
        let r = metrics(&cm, Averaging::Weighted).unwrap();
        assert!((r.accuracy - 70.0).abs() < 1e-9);
        assert!((r.recall - 70.0).abs() < 1e-9);
        assert!((r.precision - 73.33).abs() < 0.01);
        assert!((r.f1 - 70.99).abs() < 0.01);
        assert_eq!(r.per_class[0].support, 70);
        assert_eq!(r.per_class[1].support, 30);
    }

    #[test]
    fn counts() {
        let gold = [P, P, N, N];
        assert_eq!(
            confusion(&gold, &gold).unwrap(),
            ConfusionMatrix::new(2, 0, 0, 2)
        );
        let flipped = [N, N, P, P];
        assert_eq!(
            confusion(&flipped, &gold).unwrap(),
            ConfusionMatrix::new(0, 2, 2, 0)
        );
        assert!(matches!(
            confusion(&[P], &gold),
            Err(Error::LengthMismatch {
                predictions: 1,
                gold: 4
            })
        ));
    }

    #[test]
    fn single_class_perfect() {
        let r = metrics(&ConfusionMatrix::new(9, 0, 0, 0), Averaging::Weighted).unwrap();
        assert_eq!(
            (r.accuracy, r.recall, r.precision, r.f1),
            (100.0, 100.0, 100.0, 100.0)
        );
    }

    #[test]
    fn zero_over_zero() {
        let r = metrics(&ConfusionMatrix::new(0, 0, 0, 5), Averaging::Weighted).unwrap();
        assert_eq!(r.per_class[0].f1, 0.0);
        assert_eq!(r.per_class[0].precision, 0.0);
        assert_eq!(r.accuracy, 100.0);
        let m = metrics(&ConfusionMatrix::new(0, 0, 0, 5), Averaging::Macro).unwrap();
        assert_eq!(m.f1, 50.0);
    }

    fn report(name: &str, f1: f64, accuracy: f64) -> MetricsReport {
        let mut r = metrics(&ConfusionMatrix::new(1, 0, 0, 1), Averaging::Weighted).unwrap();
        r.model = name.into();
        r.f1 = f1;
        r.accuracy = accuracy;
        r
    }

    #[test]
    fn comparison_order() {
        let c = compare(&[
            report("Capsule-B", 82.04, 80.0),
            report("Stacked BiLSTM 3", 84.58, 83.59),
        ]);
        assert_eq!(c.rows[0].f1, 84.58);
        let c = compare(&[report("a", 80.0, 70.0), report("b", 80.0, 75.0)]);
        assert_eq!(c.rows[0].model, "b");
        let c = compare(&[report("only", 1.0, 1.0)]);
        assert_eq!(c.rows.len(), 1);
    }

    #[test]
    fn table_is_aligned() {
        let c = compare(&[report("rnn", 80.0, 70.0), report("bilstm-3", 90.0, 91.0)]);
        let table = c.render();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("bilstm-3"));
        assert!(lines[2].ends_with("90.00"));
        let widths: Vec<usize> = lines.iter().map(|l| l.chars().count()).collect();
        assert!(widths.iter().all(|&w| w == widths[0]));
    }
}
