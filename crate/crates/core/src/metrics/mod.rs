//! Confusion matrix, one-vs-rest metric suite, and report rendering.

mod confusion;
mod render;
mod report;

pub use confusion::{confusion, ConfusionMatrix};
pub use render::{
    read_confusion_csv, read_history_csv, render_report, write_confusion_csv, write_counts_csv,
    write_history_csv, write_metrics_csv, ReportFiles,
};
pub use report::{metrics, per_class_accuracy, Averages, ClassStats, MetricReport};
