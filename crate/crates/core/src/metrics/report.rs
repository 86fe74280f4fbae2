use serde::Serialize;

use super::ConfusionMatrix;
use crate::error::{Error, Result};

/// One-vs-rest counts and metrics for a single class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassStats {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    /// Metrics whose denominator was zero; they are reported as 0.
    pub undefined: Vec<&'static str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Averages {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub per_class: Vec<ClassStats>,
    /// Unweighted mean over classes.
    pub macro_avg: Averages,
    /// Metrics of the pooled one-vs-rest counts.
    pub micro_avg: Averages,
    /// `trace / total`.
    pub overall_accuracy: f64,
    pub total: u64,
}

fn ratio(num: u64, den: u64, name: &'static str, undefined: &mut Vec<&'static str>) -> f64 {
    if den == 0 {
        undefined.push(name);
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(precision: f64, recall: f64, undefined: &mut Vec<&'static str>) -> f64 {
    if precision + recall == 0.0 {
        undefined.push("f1");
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn stats_from_counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> ClassStats {
    let mut undefined = Vec::new();
    let accuracy = ratio(tp + tn, tp + tn + fp + fn_, "accuracy", &mut undefined);
    let precision = ratio(tp, tp + fp, "precision", &mut undefined);
    let recall = ratio(tp, tp + fn_, "recall", &mut undefined);
    let f1 = harmonic(precision, recall, &mut undefined);
    let specificity = ratio(tn, tn + fp, "specificity", &mut undefined);
    ClassStats {
        tp,
        fp,
        fn_,
        tn,
        accuracy,
        precision,
        recall,
        f1,
        specificity,
        undefined,
    }
}

/// Per-class one-vs-rest metrics plus macro and micro averages.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::invalid(
            "cannot compute metrics of an empty confusion matrix",
        ));
    }
    let n = cm.n_classes();
    let per_class: Vec<ClassStats> = (0..n)
        .map(|c| {
            let tp = cm.get(c, c);
            let fp = cm.col_sum(c) - tp;
            let fn_ = cm.row_sum(c) - tp;
            let tn = total - tp - fp - fn_;
            stats_from_counts(tp, fp, fn_, tn)
        })
        .collect();

    let mean = |f: fn(&ClassStats) -> f64| per_class.iter().map(f).sum::<f64>() / n as f64;
    let macro_avg = Averages {
        accuracy: mean(|s| s.accuracy),
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
        f1: mean(|s| s.f1),
        specificity: mean(|s| s.specificity),
    };

    let sum = |f: fn(&ClassStats) -> u64| per_class.iter().map(f).sum::<u64>();
    let pooled = stats_from_counts(sum(|s| s.tp), sum(|s| s.fp), sum(|s| s.fn_), sum(|s| s.tn));
    let micro_avg = Averages {
        accuracy: pooled.accuracy,
        precision: pooled.precision,
        recall: pooled.recall,
        f1: pooled.f1,
        specificity: pooled.specificity,
    };

    Ok(MetricReport {
        per_class,
        macro_avg,
        micro_avg,
        overall_accuracy: cm.trace() as f64 / total as f64,
        total,
    })
}

/// Diagonal over row sum per class; `None` for classes with no samples.
pub fn per_class_accuracy(cm: &ConfusionMatrix) -> Vec<Option<f64>> {
    (0..cm.n_classes())
        .map(|c| {
            let row = cm.row_sum(c);
            (row > 0).then(|| cm.get(c, c) as f64 / row as f64)
        })
        .collect()
}

impl MetricReport {
    /// Mean of the defined per-class (diagonal) accuracies.
    pub fn mean_class_accuracy(cm: &ConfusionMatrix) -> f64 {
        let defined: Vec<f64> = per_class_accuracy(cm).into_iter().flatten().collect();
        if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        }
    }
}
