//! Train the classifier head on separable Gaussian clusters with the default
//! optimizer settings and save a checkpoint.
//!
//! ```text
//! cargo run --release --example train_head -- [checkpoint.hdp]
//! ```

use std::path::PathBuf;

use speechcmd::head::{train_with, HeadConfig, TrainConfig};
use speechcmd::storage::write_checkpoint;
use speechcmd::synth::{gaussian_clusters, stratified_split};

fn main() -> speechcmd::Result<()> {
    let out = std::env::args().nth(1).map_or_else(
        || std::env::temp_dir().join("speechcmd-head.hdp"),
        PathBuf::from,
    );

    let set = gaussian_clusters(12, 200, 16, 3.0, 0.3, 7)?;
    let (train_set, val_set) = stratified_split(&set, 0.8, 8)?;
    let head = HeadConfig::new(16);
    let cfg = TrainConfig::default();
    println!(
        "{} train / {} val, widths {:?}, {} epochs x {} steps, lr {}",
        train_set.len(),
        val_set.len(),
        head.widths(),
        cfg.epochs,
        cfg.steps_per_epoch(train_set.len()),
        cfg.learning_rate
    );
    println!("epoch  train_loss  train_acc  val_loss  val_acc");
    let (params, _) = train_with(&train_set, &val_set, &head, &cfg, |r, _| {
        println!(
            "{:>5}  {:>10.4}  {:>9.4}  {:>8.4}  {:>7.4}",
            r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc
        );
        Ok(())
    })?;
    write_checkpoint(&params, &out)?;
    println!("checkpoint: {}", out.display());
    Ok(())
}
