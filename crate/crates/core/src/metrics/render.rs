//! CSV and SVG report artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{per_class_accuracy, ConfusionMatrix, MetricReport};
use crate::error::{Error, Result};
use crate::head::{EpochRecord, TrainHistory};

fn csv_error(path: &Path, err: csv::Error) -> Error {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Error::io(path, e),
            _ => unreachable!("checked is_io_error"),
        }
    } else {
        let offset = err.position().map_or(0, |p| p.byte());
        Error::format(offset, format!("{}: {err}", path.display()))
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn finish(path: &Path, mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// `metric,name,value` rows: overall accuracy, macro and micro averages,
/// then per-class metrics (including the diagonal `class_accuracy`).
pub fn write_metrics_csv(
    path: &Path,
    report: &MetricReport,
    cm: &ConfusionMatrix,
    names: &[&str],
) -> Result<()> {
    let mut rows: Vec<(&str, &str, f64)> =
        vec![("overall_accuracy", "all", report.overall_accuracy)];
    for (label, avg) in [("macro", &report.macro_avg), ("micro", &report.micro_avg)] {
        rows.extend([
            ("accuracy", label, avg.accuracy),
            ("precision", label, avg.precision),
            ("recall", label, avg.recall),
            ("f1", label, avg.f1),
            ("specificity", label, avg.specificity),
        ]);
    }
    let diag = per_class_accuracy(cm);
    for (c, stats) in report.per_class.iter().enumerate() {
        let name = names[c];
        rows.extend([
            ("accuracy", name, stats.accuracy),
            ("precision", name, stats.precision),
            ("recall", name, stats.recall),
            ("f1", name, stats.f1),
            ("specificity", name, stats.specificity),
            ("class_accuracy", name, diag[c].unwrap_or(0.0)),
        ]);
    }

    let mut w = writer(path)?;
    let err = |e| csv_error(path, e);
    w.write_record(["metric", "name", "value"]).map_err(err)?;
    for (metric, name, value) in rows {
        w.write_record([metric, name, &value.to_string()])
            .map_err(err)?;
    }
    finish(path, w)
}

/// Per-class `tp,fp,fn,tn,support,undefined`.
pub fn write_counts_csv(path: &Path, report: &MetricReport, names: &[&str]) -> Result<()> {
    let mut w = writer(path)?;
    let err = |e| csv_error(path, e);
    w.write_record(["class", "tp", "fp", "fn", "tn", "support", "undefined"])
        .map_err(err)?;
    for (stats, name) in report.per_class.iter().zip(names) {
        w.write_record([
            name.to_string(),
            stats.tp.to_string(),
            stats.fp.to_string(),
            stats.fn_.to_string(),
            stats.tn.to_string(),
            (stats.tp + stats.fn_).to_string(),
            stats.undefined.join(";"),
        ])
        .map_err(err)?;
    }
    finish(path, w)
}

/// `(n+1) x (n+1)` grid: header row of predicted class names, then one row
/// per true class.
pub fn write_confusion_csv(path: &Path, cm: &ConfusionMatrix, names: &[&str]) -> Result<()> {
    let mut w = writer(path)?;
    let err = |e| csv_error(path, e);
    let mut header = vec!["true\\pred".to_string()];
    header.extend(names.iter().map(|n| n.to_string()));
    w.write_record(&header).map_err(err)?;
    for (row, name) in cm.rows().iter().zip(names) {
        let mut rec = vec![name.to_string()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec).map_err(err)?;
    }
    finish(path, w)
}

/// Parse a confusion CSV back into class names and counts.
pub fn read_confusion_csv(path: &Path) -> Result<(Vec<String>, ConfusionMatrix)> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::format(0, format!("{}: empty confusion CSV", path.display())))?
        .map_err(|e| csv_error(path, e))?;
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::with_capacity(names.len());
    for rec in records {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let offset = rec.position().map_or(0, |p| p.byte());
        let counts = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| Error::format(offset, format!("bad count {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(counts);
    }
    if rows.len() != names.len() {
        return Err(Error::format(
            0,
            format!("{} class columns but {} rows", names.len(), rows.len()),
        ));
    }
    Ok((names, ConfusionMatrix::from_rows(rows)?))
}

pub fn write_history_csv(path: &Path, history: &TrainHistory) -> Result<()> {
    let mut w = writer(path)?;
    let err = |e| csv_error(path, e);
    w.write_record([
        "epoch",
        "train_loss",
        "train_acc",
        "val_loss",
        "val_acc",
        "seconds",
    ])
    .map_err(err)?;
    for e in &history.epochs {
        w.write_record([
            e.epoch.to_string(),
            e.train_loss.to_string(),
            e.train_acc.to_string(),
            e.val_loss.to_string(),
            e.val_acc.to_string(),
            format!("{:.3}", e.seconds),
        ])
        .map_err(err)?;
    }
    finish(path, w)
}

/// Read a history CSV. The step counts are not stored and come back as 0.
pub fn read_history_csv(path: &Path) -> Result<TrainHistory> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut epochs = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let offset = rec.position().map_or(0, |p| p.byte());
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::format(offset, format!("bad history field {i}")))
        };
        epochs.push(EpochRecord {
            epoch: field(0)? as usize,
            train_loss: field(1)?,
            train_acc: field(2)?,
            val_loss: field(3)?,
            val_acc: field(4)?,
            seconds: field(5)?,
            steps: 0,
        });
    }
    Ok(TrainHistory { epochs })
}

const SVG_FONT: &str = "font-family=\"sans-serif\"";

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    values: Vec<f64>,
}

/// One line-chart panel with a shared epoch axis.
fn line_panel(
    svg: &mut String,
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    title: &str,
    series: &[Series<'_>],
) {
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if n == 0 {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let px = |i: usize| {
        if n <= 1 {
            x0 + w / 2.0
        } else {
            x0 + w * i as f64 / (n - 1) as f64
        }
    };
    let py = |v: f64| y0 + h - h * (v - lo) / (hi - lo);

    let _ = writeln!(
        svg,
        r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#888"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" {SVG_FONT} font-size="14" text-anchor="middle">{title}</text>"#,
        x0 + w / 2.0,
        y0 - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" {SVG_FONT} font-size="10" text-anchor="end">{hi:.3}</text>"#,
        x0 - 4.0,
        y0 + 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" {SVG_FONT} font-size="10" text-anchor="end">{lo:.3}</text>"#,
        x0 - 4.0,
        y0 + h
    );
    for i in 0..n {
        let _ = writeln!(
            svg,
            r#"<text class="xtick" x="{:.2}" y="{}" {SVG_FONT} font-size="10" text-anchor="middle">{}</text>"#,
            px(i),
            y0 + h + 14.0,
            i + 1
        );
    }
    for (k, s) in series.iter().enumerate() {
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i), py(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            s.color,
            points.join(" ")
        );
        for (i, &v) in s.values.iter().enumerate() {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                px(i),
                py(v),
                s.color
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" {SVG_FONT} font-size="11" fill="{}">{}</text>"#,
            x0 + 8.0,
            y0 + 16.0 + 14.0 * k as f64,
            s.color,
            s.label
        );
    }
}

/// Accuracy (top) and loss (bottom) against epoch.
pub fn curves_svg(history: &TrainHistory) -> String {
    let (w, h) = (640.0, 560.0);
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    svg.push('\n');
    let pick = |f: fn(&EpochRecord) -> f64| history.epochs.iter().map(f).collect::<Vec<_>>();
    line_panel(
        &mut svg,
        70.0,
        40.0,
        540.0,
        200.0,
        "Accuracy",
        &[
            Series {
                label: "train",
                color: "#1f77b4",
                values: pick(|e| e.train_acc),
            },
            Series {
                label: "validation",
                color: "#d62728",
                values: pick(|e| e.val_acc),
            },
        ],
    );
    line_panel(
        &mut svg,
        70.0,
        310.0,
        540.0,
        200.0,
        "Loss",
        &[
            Series {
                label: "train",
                color: "#1f77b4",
                values: pick(|e| e.train_loss),
            },
            Series {
                label: "validation",
                color: "#d62728",
                values: pick(|e| e.val_loss),
            },
        ],
    );
    let _ = writeln!(
        svg,
        r#"<text x="340" y="545" {SVG_FONT} font-size="12" text-anchor="middle">epoch</text>"#
    );
    svg.push_str("</svg>\n");
    svg
}

/// Heat grid of row-normalized percentages.
pub fn confusion_svg(cm: &ConfusionMatrix, names: &[&str]) -> String {
    let n = cm.n_classes();
    let cell = 44.0;
    let (left, top) = (90.0, 90.0);
    let size = left + cell * n as f64 + 20.0;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    svg.push('\n');
    for (i, name) in names.iter().enumerate().take(n) {
        let c = left + cell * (i as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<text x="{c}" y="{}" {SVG_FONT} font-size="11" text-anchor="start" transform="rotate(-45 {c} {})">{name}</text>"#,
            top - 6.0,
            top - 6.0
        );
        let r = top + cell * (i as f64 + 0.5) + 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{r}" {SVG_FONT} font-size="11" text-anchor="end">{name}</text>"#,
            left - 6.0
        );
    }
    for t in 0..n {
        let row_sum = cm.row_sum(t);
        for p in 0..n {
            let pct = if row_sum == 0 {
                0.0
            } else {
                100.0 * cm.get(t, p) as f64 / row_sum as f64
            };
            let shade = (255.0 * (1.0 - pct / 100.0)).round() as u8;
            let (x, y) = (left + cell * p as f64, top + cell * t as f64);
            let _ = writeln!(
                svg,
                r##"<rect class="cell" data-true="{t}" data-pred="{p}" data-pct="{pct:.2}" x="{x}" y="{y}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#fff"/>"##
            );
            let ink = if pct > 50.0 { "#fff" } else { "#000" };
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" {SVG_FONT} font-size="10" text-anchor="middle" fill="{ink}">{pct:.1}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub metrics_csv: PathBuf,
    pub counts_csv: PathBuf,
    pub confusion_csv: PathBuf,
    pub curves_svg: Option<PathBuf>,
    pub confusion_svg: PathBuf,
}

/// Write `metrics.csv`, `counts.csv`, `confusion.csv`, `confusion.svg`,
/// and `curves.svg` when a history is given.
pub fn render_report(
    report: &MetricReport,
    cm: &ConfusionMatrix,
    history: Option<&TrainHistory>,
    names: &[&str],
    out_dir: &Path,
) -> Result<ReportFiles> {
    if names.len() != cm.n_classes() {
        return Err(Error::invalid(format!(
            "{} class names for a {}-class matrix",
            names.len(),
            cm.n_classes()
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = ReportFiles {
        metrics_csv: out_dir.join("metrics.csv"),
        counts_csv: out_dir.join("counts.csv"),
        confusion_csv: out_dir.join("confusion.csv"),
        curves_svg: history.map(|_| out_dir.join("curves.svg")),
        confusion_svg: out_dir.join("confusion.svg"),
    };
    write_metrics_csv(&files.metrics_csv, report, cm, names)?;
    write_counts_csv(&files.counts_csv, report, names)?;
    write_confusion_csv(&files.confusion_csv, cm, names)?;
    let write = |path: &Path, text: String| fs::write(path, text).map_err(|e| Error::io(path, e));
    write(&files.confusion_svg, confusion_svg(cm, names))?;
    if let (Some(path), Some(h)) = (&files.curves_svg, history) {
        write(path, curves_svg(h))?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{confusion, metrics};
    use crate::LabelSet;

    #[test]
    fn identity_matrix_grid_is_full_on_diagonal() {
        let labels: Vec<usize> = (0..12).collect();
        let cm = confusion(&labels, &labels, 12).unwrap();
        let svg = confusion_svg(&cm, &LabelSet.names());
        for c in 0..12 {
            let needle = format!(r#"data-true="{c}" data-pred="{c}" data-pct="100.00""#);
            assert!(svg.contains(&needle), "missing diagonal cell {c}");
        }
        assert_eq!(svg.matches(r#"data-pct="0.00""#).count(), 132);
    }

    #[test]
    fn curves_have_one_tick_per_epoch() {
        let history = TrainHistory {
            epochs: (1..=15)
                .map(|e| EpochRecord {
                    epoch: e,
                    train_loss: 1.0 / e as f64,
                    train_acc: 0.5,
                    val_loss: 1.1 / e as f64,
                    val_acc: 0.4,
                    seconds: 0.1,
                    steps: 3,
                })
                .collect(),
        };
        let svg = curves_svg(&history);
        // Two panels, 15 ticks each.
        assert_eq!(svg.matches(r#"class="xtick""#).count(), 30);
        // Four series of 15 markers.
        assert_eq!(svg.matches("<circle").count(), 60);
    }

    #[test]
    fn confusion_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let preds = [0, 1, 2, 2, 11, 5, 5, 5];
        let labels = [0, 1, 1, 2, 11, 5, 4, 5];
        let cm = confusion(&preds, &labels, 12).unwrap();
        let names = LabelSet.names();
        let path = dir.path().join("confusion.csv");
        write_confusion_csv(&path, &cm, &names).unwrap();
        let (back_names, back) = read_confusion_csv(&path).unwrap();
        assert_eq!(back, cm);
        assert_eq!(back_names, names);
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.lines().all(|l| l.split(',').count() == 13));
    }

    #[test]
    fn history_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        let history = TrainHistory {
            epochs: vec![EpochRecord {
                epoch: 1,
                train_loss: 0.123456789,
                train_acc: 0.5,
                val_loss: 2.0,
                val_acc: 0.25,
                seconds: 1.5,
                steps: 7,
            }],
        };
        write_history_csv(&path, &history).unwrap();
        let back = read_history_csv(&path).unwrap();
        assert_eq!(back.epochs[0].train_loss, 0.123456789);
        assert_eq!(back.epochs[0].val_acc, 0.25);
    }

    #[test]
    fn perfect_metrics_csv_all_ones() {
        let dir = tempfile::tempdir().unwrap();
        let labels: Vec<usize> = (0..12).flat_map(|c| [c, c]).collect();
        let cm = confusion(&labels, &labels, 12).unwrap();
        let report = metrics(&cm).unwrap();
        let files = render_report(&report, &cm, None, &LabelSet.names(), dir.path()).unwrap();
        let text = fs::read_to_string(files.metrics_csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("metric,name,value"));
        for line in lines {
            assert!(line.ends_with(",1"), "{line}");
        }
    }
}
