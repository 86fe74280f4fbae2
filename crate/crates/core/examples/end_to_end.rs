//! Whole pipeline through the library API: synthesize a corpus, condition
//! it, featurize every record, train on flattened log-mel patches and
//! evaluate on the validation split.
//!
//! ```text
//! cargo run --release --example end_to_end -- [work_dir] [clips_per_word]
//! ```

use std::path::PathBuf;

use ndarray::{Array2, Axis};
use speechcmd::dataset::{prepare, ClipLoader, PrepareConfig, Split};
use speechcmd::dsp::{Frontend, FrontendConfig};
use speechcmd::head::{predict, train, HeadConfig, LabeledSet, TrainConfig};
use speechcmd::metrics::{confusion, metrics, render_report};
use speechcmd::synth::write_mini_corpus;
use speechcmd::LabelSet;

fn main() -> speechcmd::Result<()> {
    let mut args = std::env::args().skip(1);
    let work = args
        .next()
        .map_or_else(|| std::env::temp_dir().join("speechcmd-e2e"), PathBuf::from);
    let per_word: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(12);
    let corpus = work.join("corpus");
    write_mini_corpus(&corpus, per_word, 2024)?;

    let manifest = prepare(&corpus, &PrepareConfig::default())?;
    println!(
        "{} records, class counts {:?}",
        manifest.len(),
        manifest.class_counts
    );

    let frontend = Frontend::new(FrontendConfig::default())?;
    let mut loader = ClipLoader::new(&corpus);
    loader.preload(&manifest)?;
    let width = 98 * 50;
    let mut features = Array2::<f32>::zeros((manifest.len(), width));
    for (i, record) in manifest.records.iter().enumerate() {
        let patch = frontend
            .featurize(&loader.load(record)?, &record.path)?
            .swap_remove(0);
        features.row_mut(i).assign(
            &patch
                .values
                .into_shape_with_order(width)
                .expect("contiguous patch"),
        );
    }

    let subset = |split: Split| {
        let idx = manifest.indices_of(split);
        let labels = idx.iter().map(|&i| manifest.records[i].label).collect();
        LabeledSet::new(features.select(Axis(0), &idx), labels)
    };
    let (train_set, val_set) = (subset(Split::Train)?, subset(Split::Val)?);
    let (params, history) = train(
        &train_set,
        &val_set,
        &HeadConfig::new(width),
        &TrainConfig::default(),
    )?;
    for e in &history.epochs {
        println!(
            "epoch {:>2}: train loss {:.4}, val acc {:.4}",
            e.epoch, e.train_loss, e.val_acc
        );
    }

    let preds: Vec<usize> = predict(&params, val_set.as_f64().view())?
        .iter()
        .map(|p| p.class)
        .collect();
    let cm = confusion(&preds, &val_set.labels, 12)?;
    let report = metrics(&cm)?;
    render_report(
        &report,
        &cm,
        Some(&history),
        &LabelSet.names(),
        &work.join("report"),
    )?;
    println!("{cm}");
    println!(
        "val accuracy {:.4}, macro F1 {:.4}; report in {}",
        report.overall_accuracy,
        report.macro_avg.f1,
        work.join("report").display()
    );
    Ok(())
}
