//! Build a manifest from a Speech Commands style tree. Without arguments a
//! small synthetic corpus is generated first.
//!
//! ```text
//! cargo run --example prepare_dataset -- [dataset_root] [manifest.jsonl]
//! ```

use std::path::PathBuf;

use speechcmd::dataset::{prepare, PrepareConfig, Split};
use speechcmd::synth::write_mini_corpus;
use speechcmd::LabelSet;

fn main() -> speechcmd::Result<()> {
    let mut args = std::env::args().skip(1);
    let scratch = std::env::temp_dir().join("speechcmd-prepare-example");
    let root = match args.next() {
        Some(r) => PathBuf::from(r),
        None => {
            write_mini_corpus(&scratch, 10, 1)?;
            scratch.clone()
        }
    };
    let out = args
        .next()
        .map_or_else(|| scratch.join("manifest.jsonl"), PathBuf::from);

    let manifest = prepare(&root, &PrepareConfig::default())?;
    manifest.write(&out)?;

    let train = manifest.split_counts(Split::Train);
    let val = manifest.split_counts(Split::Val);
    println!("{:<12} {:>6} {:>6} {:>6}", "class", "total", "train", "val");
    for (i, name) in LabelSet.names().iter().enumerate() {
        println!(
            "{name:<12} {:>6} {:>6} {:>6}",
            manifest.class_counts[i], train[i], val[i]
        );
    }
    let augmented = manifest.records.iter().filter(|r| r.is_augmented()).count();
    println!(
        "{} records ({augmented} noise-mixed) -> {}",
        manifest.len(),
        out.display()
    );
    for d in &manifest.diagnostics {
        println!("note: {d}");
    }
    Ok(())
}
