use super::{DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::LabelSet;

const SPLIT_STREAM: u64 = 0x5350_4C49;

/// Stratified hold-out split.
///
/// Records are taken in canonical (path) order; each class, in label order,
/// is shuffled with one generator seeded from `seed`, and its first
/// `round(count * train_fraction)` records go to train, the rest to val.
/// Classes with no records are skipped.
pub fn split(
    manifest: &DatasetManifest,
    train_fraction: f64,
    seed: u64,
) -> Result<DatasetManifest> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut out = manifest.clone();
    out.canonicalize();
    let mut rng = SplitMix64::derive(seed, SPLIT_STREAM);
    for class in 0..LabelSet::N_CLASSES {
        let mut members: Vec<usize> = (0..out.records.len())
            .filter(|&i| out.records[i].label == class)
            .collect();
        match members.len() {
            0 => continue,
            1 => {
                return Err(Error::invalid(format!(
                    "class {} has a single record; a split needs at least 2",
                    LabelSet.name(class)?
                )))
            }
            _ => {}
        }
        rng.shuffle(&mut members);
        let n_train = (members.len() as f64 * train_fraction).round() as usize;
        for (rank, &i) in members.iter().enumerate() {
            out.records[i].split = Some(if rank < n_train {
                Split::Train
            } else {
                Split::Val
            });
        }
    }
    Ok(out)
}
