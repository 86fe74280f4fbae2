use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ingest, split, Augmentation, DatasetManifest, ManifestRecord, Split};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::LabelSet;

const UNKNOWN_STREAM: u64 = 0x554E_4B4E;
const BACKGROUND_STREAM: u64 = 0x424B_4752;
const AUGMENT_STREAM: u64 = 0x4155_474D;

/// Dataset conditioning settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepareConfig {
    pub seed: u64,
    pub train_fraction: f64,
    /// SNR range for noise mixing, dB; draws are uniform.
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    /// Add one noise-mixed copy of each training command clip.
    pub augment: bool,
    /// Cap `unknown` at the largest command-class count.
    pub cap_unknown: bool,
    /// Raise `background` to the smallest command-class count with
    /// segment-on-segment noise mixes.
    pub top_up_background: bool,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            train_fraction: 0.8,
            snr_min_db: 5.0,
            snr_max_db: 30.0,
            augment: true,
            cap_unknown: true,
            top_up_background: true,
        }
    }
}

impl PrepareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_min_db.is_nan() || self.snr_max_db.is_nan() || self.snr_min_db > self.snr_max_db
        {
            return Err(Error::invalid(format!(
                "SNR range {}..{} dB is empty",
                self.snr_min_db, self.snr_max_db
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

fn command_counts(m: &DatasetManifest) -> impl Iterator<Item = usize> + '_ {
    m.class_counts[..LabelSet::UNKNOWN].iter().copied()
}

/// Keep a seeded uniform subset of `unknown` no larger than the biggest
/// command class.
pub fn cap_unknown(manifest: &mut DatasetManifest, seed: u64) {
    let Some(cap) = command_counts(manifest).max().filter(|&c| c > 0) else {
        return;
    };
    if manifest.class_counts[LabelSet::UNKNOWN] <= cap {
        return;
    }
    let mut unknown: Vec<usize> = (0..manifest.len())
        .filter(|&i| manifest.records[i].label == LabelSet::UNKNOWN)
        .collect();
    SplitMix64::derive(seed, UNKNOWN_STREAM).shuffle(&mut unknown);
    let mut drop = vec![false; manifest.len()];
    unknown[cap..].iter().for_each(|&i| drop[i] = true);
    let mut i = 0;
    manifest.records.retain(|_| {
        let keep = !drop[i];
        i += 1;
        keep
    });
    manifest.canonicalize();
}

/// Add noise-on-noise mixes of background segments until the class reaches
/// the smallest non-empty command-class count.
pub fn top_up_background(manifest: &mut DatasetManifest, cfg: &PrepareConfig) {
    let Some(target) = command_counts(manifest).filter(|&c| c > 0).min() else {
        return;
    };
    let segments: Vec<String> = manifest
        .records
        .iter()
        .filter(|r| r.label == LabelSet::BACKGROUND && !r.is_augmented())
        .map(|r| r.path.clone())
        .collect();
    let have = manifest.class_counts[LabelSet::BACKGROUND];
    if segments.is_empty() || have >= target {
        return;
    }
    let mut rng = SplitMix64::derive(cfg.seed, BACKGROUND_STREAM);
    let n = segments.len();
    for k in 0..target - have {
        let base = &segments[k % n];
        let other = if n > 1 {
            // Any segment except the base one.
            let j = rng.below(n - 1);
            &segments[if j >= k % n { j + 1 } else { j }]
        } else {
            base
        };
        let snr_db = rng.uniform(cfg.snr_min_db, cfg.snr_max_db);
        manifest.records.push(ManifestRecord {
            path: format!("{base}#mix{}", k / n),
            label: LabelSet::BACKGROUND,
            split: None,
            augmentation: Augmentation::NoiseMixed {
                snr_db,
                noise_path: other.clone(),
            },
            duration_s: 1.0,
        });
    }
    manifest.canonicalize();
}

/// One noise-mixed copy of every training command clip, drawn from the
/// plain background segments. The copies inherit the train split.
pub fn augment_training_commands(manifest: &mut DatasetManifest, cfg: &PrepareConfig) {
    let noise: Vec<String> = manifest
        .records
        .iter()
        .filter(|r| r.label == LabelSet::BACKGROUND && !r.is_augmented())
        .map(|r| r.path.clone())
        .collect();
    if noise.is_empty() {
        manifest
            .diagnostics
            .push("no background segments; command clips were not augmented".into());
        return;
    }
    let mut rng = SplitMix64::derive(cfg.seed, AUGMENT_STREAM);
    let copies: Vec<ManifestRecord> = manifest
        .records
        .iter()
        .filter(|r| {
            LabelSet.is_command(r.label) && r.split == Some(Split::Train) && !r.is_augmented()
        })
        .map(|r| {
            let noise_path = noise[rng.below(noise.len())].clone();
            let snr_db = rng.uniform(cfg.snr_min_db, cfg.snr_max_db);
            ManifestRecord {
                path: format!("{}#mix0", r.path),
                label: r.label,
                split: Some(Split::Train),
                augmentation: Augmentation::NoiseMixed { snr_db, noise_path },
                duration_s: r.duration_s,
            }
        })
        .collect();
    manifest.records.extend(copies);
    manifest.canonicalize();
}

/// Full conditioning: ingest, cap `unknown`, top up `background`, split,
/// then augment the training command clips.
pub fn prepare(root: &Path, cfg: &PrepareConfig) -> Result<DatasetManifest> {
    cfg.validate()?;
    let mut manifest = ingest(root, &LabelSet)?;
    manifest.seed = cfg.seed;
    if cfg.cap_unknown {
        cap_unknown(&mut manifest, cfg.seed);
    }
    if cfg.top_up_background {
        top_up_background(&mut manifest, cfg);
    }
    let mut manifest = split(&manifest, cfg.train_fraction, cfg.seed)?;
    if cfg.augment {
        augment_training_commands(&mut manifest, cfg);
    }
    manifest.validate()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(path: String, label: usize) -> ManifestRecord {
        ManifestRecord {
            path,
            label,
            split: None,
            augmentation: Augmentation::None,
            duration_s: 1.0,
        }
    }

    fn manifest(counts: &[(usize, usize)]) -> DatasetManifest {
        let records = counts
            .iter()
            .flat_map(|&(label, n)| {
                (0..n).map(move |i| plain(format!("w{label}/{i:04}.wav"), label))
            })
            .collect();
        DatasetManifest::new(records, 5)
    }

    #[test]
    fn unknown_capped_at_largest_command() {
        let mut m = manifest(&[(0, 30), (1, 40), (LabelSet::UNKNOWN, 100)]);
        cap_unknown(&mut m, 5);
        assert_eq!(m.class_counts[LabelSet::UNKNOWN], 40);
        let mut again = manifest(&[(0, 30), (1, 40), (LabelSet::UNKNOWN, 100)]);
        cap_unknown(&mut again, 5);
        assert_eq!(m, again);
    }

    #[test]
    fn background_topped_up_to_smallest_command() {
        let mut m = manifest(&[(0, 30), (1, 20), (LabelSet::BACKGROUND, 7)]);
        top_up_background(&mut m, &PrepareConfig::default());
        assert_eq!(m.class_counts[LabelSet::BACKGROUND], 20);
        m.validate().unwrap();
        for r in m.records.iter().filter(|r| r.is_augmented()) {
            let Augmentation::NoiseMixed { snr_db, noise_path } = &r.augmentation else {
                unreachable!()
            };
            assert!((5.0..30.0).contains(snr_db));
            let base = r.path.rsplit_once("#mix").unwrap().0;
            assert_ne!(base, noise_path);
        }
    }

    #[test]
    fn augmentation_only_touches_training_commands() {
        let base = manifest(&[(0, 10), (LabelSet::UNKNOWN, 10), (LabelSet::BACKGROUND, 10)]);
        let mut m = split(&base, 0.8, 3).unwrap();
        augment_training_commands(&mut m, &PrepareConfig::default());
        let mixed: Vec<&ManifestRecord> = m.records.iter().filter(|r| r.is_augmented()).collect();
        assert_eq!(mixed.len(), 8);
        assert!(mixed
            .iter()
            .all(|r| r.label == 0 && r.split == Some(Split::Train)));
        m.validate().unwrap();
    }
}
