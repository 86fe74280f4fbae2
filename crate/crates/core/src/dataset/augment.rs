use crate::dsp::{rms, AudioClip};
use crate::error::{Error, Result};

/// Noise RMS used when the clean clip is silent.
pub const SILENT_CLIP_NOISE_RMS: f64 = 0.1;

/// Consecutive non-overlapping one-second pieces of each noise clip; a
/// trailing remainder shorter than one second is dropped.
pub fn segment_background(noise_clips: &[AudioClip]) -> Vec<AudioClip> {
    noise_clips
        .iter()
        .flat_map(|clip| {
            let seg = clip.sample_rate as usize;
            clip.samples.chunks_exact(seg).map(move |chunk| AudioClip {
                samples: chunk.to_vec(),
                sample_rate: clip.sample_rate,
            })
        })
        .collect()
}

/// How a mix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixOutcome {
    Mixed,
    /// Infinite SNR requested; clip returned as is.
    Passthrough,
    /// Clean clip had zero energy; output is noise at a reference level.
    SilentClip,
    /// Noise had zero energy; clip returned as is.
    SilentNoise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mix {
    pub clip: AudioClip,
    pub gain: f64,
    pub outcome: MixOutcome,
}

/// `clip + g * noise` with `g` chosen so that
/// `20 log10(rms(clip) / rms(g * noise)) == snr_db`, clipped to `[-1, 1]`.
pub fn augment_mix(clip: &AudioClip, noise: &AudioClip, snr_db: f64) -> Result<Mix> {
    if clip.sample_rate != noise.sample_rate || clip.len() != noise.len() {
        return Err(Error::invalid(format!(
            "mix needs equal shapes: clip {} @ {} Hz, noise {} @ {} Hz",
            clip.len(),
            clip.sample_rate,
            noise.len(),
            noise.sample_rate
        )));
    }
    if snr_db.is_nan() {
        return Err(Error::invalid("SNR is NaN"));
    }
    let unchanged = |outcome| Mix {
        clip: clip.clone(),
        gain: 0.0,
        outcome,
    };
    if snr_db == f64::INFINITY {
        return Ok(unchanged(MixOutcome::Passthrough));
    }
    let noise_rms = rms(&noise.samples);
    if noise_rms == 0.0 {
        return Ok(unchanged(MixOutcome::SilentNoise));
    }
    let clip_rms = rms(&clip.samples);
    let (gain, outcome) = if clip_rms == 0.0 {
        (SILENT_CLIP_NOISE_RMS / noise_rms, MixOutcome::SilentClip)
    } else {
        (
            clip_rms / (noise_rms * 10f64.powf(snr_db / 20.0)),
            MixOutcome::Mixed,
        )
    };
    let samples = clip
        .samples
        .iter()
        .zip(&noise.samples)
        .map(|(&c, &n)| (c as f64 + gain * n as f64).clamp(-1.0, 1.0) as f32)
        .collect();
    Ok(Mix {
        clip: AudioClip {
            samples,
            sample_rate: clip.sample_rate,
        },
        gain,
        outcome,
    })
}
