use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{augment_mix, parse_source, Augmentation, DatasetManifest, ManifestRecord};
use crate::audio::read_wav;
use crate::dsp::{pad_or_trim, resample, AudioClip, TARGET_RATE};
use crate::error::{Error, Result};

/// Regenerates the audio behind manifest records, including noise mixes.
///
/// Long noise recordings are decoded once and shared; call [`preload`]
/// before loading records concurrently.
///
/// [`preload`]: ClipLoader::preload
#[derive(Debug, Default)]
pub struct ClipLoader {
    root: PathBuf,
    cache: HashMap<String, Arc<AudioClip>>,
}

impl ClipLoader {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            cache: HashMap::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Decode every file addressed by segment, directly or as a noise source.
    pub fn preload(&mut self, manifest: &DatasetManifest) -> Result<()> {
        let mut files: Vec<String> = Vec::new();
        for r in &manifest.records {
            let src = r.source()?;
            if src.segment.is_some() {
                files.push(src.file.to_string());
            }
            if let Augmentation::NoiseMixed { noise_path, .. } = &r.augmentation {
                files.push(parse_source(noise_path)?.file.to_string());
            }
        }
        files.sort();
        files.dedup();
        for f in files {
            if self.cache.contains_key(&f) {
                continue;
            }
            // Undecodable files stay uncached and fail again per record.
            if let Ok(clip) = self.decode(&f) {
                self.cache.insert(f, Arc::new(clip));
            }
        }
        Ok(())
    }

    fn decode(&self, file: &str) -> Result<AudioClip> {
        let clip = read_wav(&self.root.join(file))?;
        if clip.is_empty() {
            return Ok(AudioClip::silence(0, TARGET_RATE));
        }
        resample(&clip, TARGET_RATE)
    }

    fn file(&self, file: &str) -> Result<Arc<AudioClip>> {
        match self.cache.get(file) {
            Some(clip) => Ok(Arc::clone(clip)),
            None => self.decode(file).map(Arc::new),
        }
    }

    /// Audio addressed by a record path (no augmentation), at 16 kHz.
    pub fn load_path(&self, path: &str) -> Result<AudioClip> {
        let src = parse_source(path)?;
        let clip = self.file(src.file)?;
        match src.segment {
            None => Ok((*clip).clone()),
            Some(i) => {
                let seg = TARGET_RATE as usize;
                let piece = clip.samples.get(i * seg..(i + 1) * seg).ok_or_else(|| {
                    Error::invalid(format!("{path}: segment {i} beyond end of file"))
                })?;
                Ok(AudioClip {
                    samples: piece.to_vec(),
                    sample_rate: TARGET_RATE,
                })
            }
        }
    }

    /// Audio for a record at 16 kHz. Noise-mixed records are rebuilt from
    /// the first one-second segment of the clip and the recorded noise
    /// segment at the recorded SNR.
    pub fn load(&self, record: &ManifestRecord) -> Result<AudioClip> {
        let clip = self.load_path(&record.path)?;
        match &record.augmentation {
            Augmentation::None => Ok(clip),
            Augmentation::NoiseMixed { snr_db, noise_path } => {
                let clean = pad_or_trim(&clip, 1.0).swap_remove(0);
                let noise = self.load_path(noise_path)?;
                Ok(augment_mix(&clean, &noise, *snr_db)?.clip)
            }
        }
    }
}
