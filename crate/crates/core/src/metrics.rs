//! Confusion counts and the four reported percentages: accuracy, precision,
//! recall, f-score. Class 1 (stressed) is the positive class.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

pub fn confusion(predictions: &[u8], labels: &[u8]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Data("no predictions to score".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        if p > 1 || l > 1 {
            return Err(Error::Data(format!(
                "labels must be 0 or 1, got prediction {p} / label {l}"
            )));
        }
        match (p, l) {
            (1, 1) => cm.true_pos += 1,
            (1, 0) => cm.false_pos += 1,
            (0, 1) => cm.false_neg += 1,
            (0, 0) => cm.true_neg += 1,
            _ => unreachable!(),
        }
    }
    Ok(cm)
}

/// The four percentages. A zero denominator yields 0.0 and sets the matching
/// degenerate flag instead of failing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub degenerate_precision: bool,
    pub degenerate_recall: bool,
    pub degenerate_f: bool,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Data("empty confusion matrix".into()));
    }
    let tp = cm.true_pos as f64;
    let accuracy = 100.0 * (tp + cm.true_neg as f64) / total as f64;
    let p_den = cm.true_pos + cm.false_pos;
    let r_den = cm.true_pos + cm.false_neg;
    let precision = if p_den == 0 { 0.0 } else { 100.0 * tp / p_den as f64 };
    let recall = if r_den == 0 { 0.0 } else { 100.0 * tp / r_den as f64 };
    let f_degenerate = precision + recall == 0.0;
    let f_score = if f_degenerate {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f_score,
        degenerate_precision: p_den == 0,
        degenerate_recall: r_den == 0,
        degenerate_f: f_degenerate,
    })
}

/// Half-up rounding to one decimal, the table formatting convention.
pub fn round1(x: f64) -> f64 {
    (x * 10.0 + 0.5).floor() / 10.0
}

impl Metrics {
    pub fn rounded(&self) -> [f64; 4] {
        [
            round1(self.accuracy),
            round1(self.precision),
            round1(self.recall),
            round1(self.f_score),
        ]
    }

    /// One tab-separated row: method, accuracy, precision, recall, f-score.
    pub fn tsv_row(&self, method: &str) -> String {
        let [a, p, r, f] = self.rounded();
        format!("{method}\t{a:.1}\t{p:.1}\t{r:.1}\t{f:.1}")
    }

    /// JSON object mapping the method name to its four rounded metrics.
    pub fn json_object(&self, method: &str) -> String {
        let [a, p, r, f] = self.rounded();
        let mut out = String::new();
        write!(
            out,
            "{{\"{method}\":{{\"accuracy\":{a:.1},\"precision\":{p:.1},\"recall\":{r:.1},\"f_score\":{f:.1}}}}}"
        )
        .expect("string write");
        out
    }
}
