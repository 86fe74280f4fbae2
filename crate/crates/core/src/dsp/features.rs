use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{frame, pad_or_trim, resample, stft_power, AudioClip, FrameConfig, MelFilterbank};
use crate::error::{Error, Result};

/// Additive floor inside the log compression, `ln(x + LOG_FLOOR)`.
pub const LOG_FLOOR: f64 = 1e-6;

/// Front-end settings. Defaults: 16 kHz, 1 s segments, 25 ms frames with
/// 10 ms hop, 50 mel bands over 0..8000 Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontendConfig {
    pub frame: FrameConfig,
    pub segment_duration_s: f64,
    pub n_bands: usize,
    pub f_min: f64,
    /// Upper band edge; `None` means Nyquist.
    pub f_max: Option<f64>,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            frame: FrameConfig::default(),
            segment_duration_s: 1.0,
            n_bands: 50,
            f_min: 0.0,
            f_max: None,
        }
    }
}

impl FrontendConfig {
    pub fn segment_len(&self) -> usize {
        (self.segment_duration_s * self.frame.sample_rate as f64).round() as usize
    }

    /// Frames per segment (98 with the defaults).
    pub fn frames_per_segment(&self) -> usize {
        super::frame_count(
            self.segment_len(),
            self.frame.frame_len(),
            self.frame.hop_len(),
        )
    }

    pub fn n_bins(&self) -> usize {
        self.frame.frame_len() / 2 + 1
    }

    pub fn patch_shape(&self) -> (usize, usize) {
        (self.frames_per_segment(), self.n_bands)
    }

    pub fn filterbank(&self) -> Result<MelFilterbank> {
        self.frame.validate()?;
        let rate = self.frame.sample_rate;
        let f_max = self.f_max.unwrap_or(rate as f64 / 2.0);
        MelFilterbank::new(self.n_bands, self.n_bins(), rate, self.f_min, f_max)
    }
}

/// Log-mel matrix for one segment, `[frames x bands]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePatch {
    pub values: Array2<f32>,
    pub source_clip_id: String,
    pub segment_index: usize,
}

/// Featurize one clip with the default front-end.
pub fn featurize(clip: &AudioClip, clip_id: &str) -> Result<Vec<FeaturePatch>> {
    Frontend::new(FrontendConfig::default())?.featurize(clip, clip_id)
}

/// Featurize a single segment that is already at the working rate and
/// exactly one segment long.
pub fn featurize_segment(
    segment: &AudioClip,
    cfg: &FrontendConfig,
    filterbank: &MelFilterbank,
) -> Result<Array2<f32>> {
    let frames = frame(segment, &cfg.frame)?;
    let spec = stft_power(&frames, cfg.frame.sample_rate)?;
    let energies = filterbank.apply(&spec)?;
    let values = energies.mapv(|e| (e + LOG_FLOOR).ln() as f32);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in log-mel patch"));
    }
    Ok(values)
}

/// A configured front-end with its filterbank built once.
#[derive(Debug, Clone)]
pub struct Frontend {
    cfg: FrontendConfig,
    filterbank: MelFilterbank,
}

impl Frontend {
    pub fn new(cfg: FrontendConfig) -> Result<Self> {
        let filterbank = cfg.filterbank()?;
        if cfg.frames_per_segment() == 0 {
            return Err(Error::invalid("segment is shorter than one frame"));
        }
        Ok(Self { cfg, filterbank })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    /// Resample, segment and featurize; one patch per segment.
    pub fn featurize(&self, clip: &AudioClip, clip_id: &str) -> Result<Vec<FeaturePatch>> {
        let rate = self.cfg.frame.sample_rate;
        let at_rate = if clip.is_empty() {
            AudioClip::silence(0, rate)
        } else {
            resample(clip, rate)?
        };
        pad_or_trim(&at_rate, self.cfg.segment_duration_s)
            .iter()
            .enumerate()
            .map(|(i, seg)| {
                Ok(FeaturePatch {
                    values: featurize_segment(seg, &self.cfg, &self.filterbank)?,
                    source_clip_id: clip_id.to_string(),
                    segment_index: i,
                })
            })
            .collect()
    }
}
