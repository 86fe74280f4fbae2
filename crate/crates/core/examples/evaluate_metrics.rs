//! Compute per-class and averaged metrics from predictions and render the
//! report files.
//!
//! ```text
//! cargo run --example evaluate_metrics -- [out_dir]
//! ```

use std::path::PathBuf;

use speechcmd::metrics::{confusion, metrics, per_class_accuracy, render_report};
use speechcmd::rng::SplitMix64;
use speechcmd::LabelSet;

fn main() -> speechcmd::Result<()> {
    let out = std::env::args().nth(1).map_or_else(
        || std::env::temp_dir().join("speechcmd-report"),
        PathBuf::from,
    );

    // A predictor that is right 90% of the time and otherwise guesses.
    let mut rng = SplitMix64::new(3);
    let labels: Vec<usize> = (0..1200).map(|i| i % 12).collect();
    let preds: Vec<usize> = labels
        .iter()
        .map(|&l| {
            if rng.next_f64() < 0.9 {
                l
            } else {
                rng.below(12)
            }
        })
        .collect();

    let cm = confusion(&preds, &labels, 12)?;
    let report = metrics(&cm)?;
    let names = LabelSet.names();
    println!(
        "{:<11} {:>9} {:>9} {:>9} {:>9}",
        "class", "precision", "recall", "f1", "spec"
    );
    for (name, s) in names.iter().zip(&report.per_class) {
        println!(
            "{name:<11} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            s.precision, s.recall, s.f1, s.specificity
        );
    }
    let m = report.macro_avg;
    println!(
        "{:<11} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
        "macro", m.precision, m.recall, m.f1, m.specificity
    );
    println!(
        "overall accuracy {:.4} ({} / {})",
        report.overall_accuracy,
        cm.trace(),
        cm.total()
    );
    let diag = per_class_accuracy(&cm);
    println!("diagonal accuracy of 'yes': {:.4}", diag[0].unwrap_or(0.0));

    let files = render_report(&report, &cm, None, &names, &out)?;
    println!("wrote {} and friends", files.metrics_csv.display());
    Ok(())
}
