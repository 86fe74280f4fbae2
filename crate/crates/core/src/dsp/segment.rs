use serde::{Deserialize, Serialize};

use super::AudioClip;
use crate::error::{Error, Result};

/// Frame and hop geometry for the short-time analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameConfig {
    pub frame_duration_s: f64,
    pub hop_duration_s: f64,
    pub sample_rate: u32,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            frame_duration_s: 0.025,
            hop_duration_s: 0.010,
            sample_rate: 16_000,
        }
    }
}

impl FrameConfig {
    pub fn frame_len(&self) -> usize {
        (self.frame_duration_s * self.sample_rate as f64).round() as usize
    }

    pub fn hop_len(&self) -> usize {
        (self.hop_duration_s * self.sample_rate as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let (frame_len, hop_len) = (self.frame_len(), self.hop_len());
        if self.sample_rate == 0 || hop_len == 0 || hop_len > frame_len {
            return Err(Error::invalid(format!(
                "frame geometry needs 0 < hop ({hop_len}) <= frame ({frame_len}) at {} Hz",
                self.sample_rate
            )));
        }
        Ok(())
    }
}

/// Number of full frames in a signal of `len` samples.
pub fn frame_count(len: usize, frame_len: usize, hop_len: usize) -> usize {
    if len < frame_len {
        0
    } else {
        (len - frame_len) / hop_len + 1
    }
}

/// Split a clip into fixed-length segments of `segment_duration_s`.
///
/// A clip shorter than one segment is zero-padded symmetrically, with the
/// odd sample (if any) going to the end. Longer clips are cut into
/// consecutive segments and the last one is zero-padded at the end. A
/// zero-length clip yields one all-zero segment.
pub fn pad_or_trim(clip: &AudioClip, segment_duration_s: f64) -> Vec<AudioClip> {
    let seg_len = (segment_duration_s * clip.sample_rate as f64).round() as usize;
    let len = clip.len();
    if len <= seg_len {
        let lead = (seg_len - len) / 2;
        let mut samples = vec![0.0f32; seg_len];
        samples[lead..lead + len].copy_from_slice(&clip.samples);
        return vec![AudioClip {
            samples,
            sample_rate: clip.sample_rate,
        }];
    }
    clip.samples
        .chunks(seg_len)
        .map(|chunk| {
            let mut samples = chunk.to_vec();
            samples.resize(seg_len, 0.0);
            AudioClip {
                samples,
                sample_rate: clip.sample_rate,
            }
        })
        .collect()
}

/// Overlapping analysis frames, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames {
    data: Vec<f64>,
    frame_len: usize,
}

impl Frames {
    /// Build from explicit frames. All frames must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let frame_len = rows.first().map_or(0, Vec::len);
        if frame_len == 0 {
            return Err(Error::invalid("frames must be non-empty"));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != frame_len) {
            return Err(Error::invalid(format!(
                "frame {bad} has length {} but frame 0 has {frame_len}",
                rows[bad].len()
            )));
        }
        Ok(Self {
            data: rows.concat(),
            frame_len,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn get(&self, m: usize) -> &[f64] {
        &self.data[m * self.frame_len..(m + 1) * self.frame_len]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.frame_len)
    }
}

/// Cut a clip into frames; frame `m` starts at sample `m * hop_len`.
pub fn frame(clip: &AudioClip, cfg: &FrameConfig) -> Result<Frames> {
    cfg.validate()?;
    let (frame_len, hop_len) = (cfg.frame_len(), cfg.hop_len());
    if clip.len() < frame_len {
        return Err(Error::invalid(format!(
            "clip of {} samples is shorter than one frame ({frame_len})",
            clip.len()
        )));
    }
    let n = frame_count(clip.len(), frame_len, hop_len);
    let mut data = Vec::with_capacity(n * frame_len);
    for m in 0..n {
        let start = m * hop_len;
        data.extend(
            clip.samples[start..start + frame_len]
                .iter()
                .map(|&s| s as f64),
        );
    }
    Ok(Frames { data, frame_len })
}
