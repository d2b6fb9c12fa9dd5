//! Binary confusion matrix and precision/recall/F1 classification report.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{truth} true labels but {predicted} predictions")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("no label/prediction pairs to evaluate")]
    EmptyInput,
    #[error("label {0} is not 0 or 1")]
    InvalidLabel(u8),
    #[error("confusion matrix has no entries")]
    EmptyMatrix,
}

/// Rows are the true class, columns the predicted class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    /// `[[tn, fp], [fn, tp]]`
    pub fn as_rows(&self) -> [[u64; 2]; 2] {
        [[self.tn, self.fp], [self.fn_, self.tp]]
    }

    /// Matrix obtained by renaming class 0 ↔ 1.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            tp: self.tn,
        }
    }
}

pub fn confusion_matrix(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            predicted: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (1, 1) => cm.tp += 1,
            (t, p) => return Err(MetricsError::InvalidLabel(if t > 1 { t } else { p })),
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AverageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class_names: [String; 2],
    pub per_class: [ClassMetrics; 2],
    pub accuracy: f64,
    pub macro_avg: AverageMetrics,
    pub weighted_avg: AverageMetrics,
    pub total: u64,
    /// Set when some ratio was 0/0 and reported as 0.
    pub zero_division: bool,
}

fn ratio(num: u64, den: u64, zero_division: &mut bool) -> f64 {
    if den == 0 {
        *zero_division = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64, zero_division: &mut bool) -> f64 {
    if p + r == 0.0 {
        *zero_division = true;
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn classification_report(cm: &ConfusionMatrix) -> Result<ClassificationReport, MetricsError> {
    classification_report_named(cm, ["0".to_string(), "1".to_string()])
}

pub fn classification_report_named(
    cm: &ConfusionMatrix,
    class_names: [String; 2],
) -> Result<ClassificationReport, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let mut zero_division = false;
    // (correct, predicted as class, actually class)
    let counts = [
        (cm.tn, cm.tn + cm.fn_, cm.tn + cm.fp),
        (cm.tp, cm.tp + cm.fp, cm.tp + cm.fn_),
    ];
    let per_class = counts.map(|(correct, predicted, support)| {
        let precision = ratio(correct, predicted, &mut zero_division);
        let recall = ratio(correct, support, &mut zero_division);
        ClassMetrics {
            precision,
            recall,
            f1: f1(precision, recall, &mut zero_division),
            support,
        }
    });

    let macro_avg = AverageMetrics {
        precision: (per_class[0].precision + per_class[1].precision) / 2.0,
        recall: (per_class[0].recall + per_class[1].recall) / 2.0,
        f1: (per_class[0].f1 + per_class[1].f1) / 2.0,
    };
    // Weights support/total are exactly 1/2 when supports are equal, which
    // makes the weighted average bit-identical to the macro average.
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        per_class
            .iter()
            .map(|c| f(c) * (c.support as f64 / total as f64))
            .sum::<f64>()
    };
    let weighted_avg = AverageMetrics {
        precision: weighted(|c| c.precision),
        recall: weighted(|c| c.recall),
        f1: weighted(|c| c.f1),
    };

    Ok(ClassificationReport {
        class_names,
        per_class,
        accuracy: (cm.tn + cm.tp) as f64 / total as f64,
        macro_avg,
        weighted_avg,
        total,
        zero_division,
    })
}

impl fmt::Display for ClassificationReport {
    /// Aligned table with two decimals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .class_names
            .iter()
            .map(|n| n.chars().count())
            .chain(["weighted avg".len()])
            .max()
            .unwrap_or(12);
        writeln!(
            f,
            "{:>width$} {:>10} {:>10} {:>10} {:>10}",
            "", "precision", "recall", "f1-score", "support"
        )?;
        writeln!(f)?;
        for (name, c) in self.class_names.iter().zip(&self.per_class) {
            writeln!(
                f,
                "{:>width$} {:>10.2} {:>10.2} {:>10.2} {:>10}",
                name, c.precision, c.recall, c.f1, c.support
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:>width$} {:>10} {:>10} {:>10.2} {:>10}",
            "accuracy", "", "", self.accuracy, self.total
        )?;
        for (name, a) in [("macro avg", &self.macro_avg), ("weighted avg", &self.weighted_avg)] {
            writeln!(
                f,
                "{:>width$} {:>10.2} {:>10.2} {:>10.2} {:>10}",
                name, a.precision, a.recall, a.f1, self.total
            )?;
        }
        if self.zero_division {
            writeln!(f, "\nnote: some metrics were 0/0 and are reported as 0")?;
        }
        Ok(())
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.total().to_string().len().max(6);
        writeln!(f, "{:>8} {:>w$} {:>w$}", "", "pred 0", "pred 1")?;
        writeln!(f, "{:>8} {:>w$} {:>w$}", "true 0", self.tn, self.fp)?;
        writeln!(f, "{:>8} {:>w$} {:>w$}", "true 1", self.fn_, self.tp)
    }
}
