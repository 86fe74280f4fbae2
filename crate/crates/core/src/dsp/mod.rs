//! Waveform to log-mel front-end.
//!
//! The pipeline is `resample` → `pad_or_trim` → `frame` → `stft_power` →
//! `MelFilterbank::apply` → log compression, wrapped up by [`featurize`].

mod features;
mod mel;
mod resample;
mod segment;
mod stft;

pub use features::{
    featurize, featurize_segment, FeaturePatch, Frontend, FrontendConfig, LOG_FLOOR,
};
pub use mel::{build_filterbank, hz_to_mel, mel_to_hz, MelFilterbank};
pub use resample::{resample, KAISER_BETA, SINC_HALF_LEN};
pub use segment::{frame, frame_count, pad_or_trim, FrameConfig, Frames};
pub use stft::{hann_window, stft_power, Spectrogram};

use crate::error::{Error, Result};

/// Default working sample rate of the front-end.
pub const TARGET_RATE: u32 = 16_000;

/// Mono waveform with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioClip {
    /// Build a clip, rejecting a zero sample rate.
    ///
    /// Empty sample buffers are allowed here; operations that need audio
    /// check for it themselves.
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }
}

pub(crate) fn rms(samples: &[f32]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let sum: f64 = samples.iter().map(|&s| (s as f64) * (s as f64)).sum();
    (sum / samples.len() as f64).sqrt()
}
