//! Synthetic fixtures: separable embedding clusters and a miniature
//! Speech Commands style corpus of tone "words".

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::audio::write_wav;
use crate::dsp::AudioClip;
use crate::error::{Error, Result};
use crate::head::LabeledSet;
use crate::labels::{COMMANDS, NOISE_DIR};
use crate::rng::SplitMix64;

/// Sine tone.
pub fn tone(freq_hz: f64, duration_s: f64, sample_rate: u32, amplitude: f64) -> AudioClip {
    let n = (duration_s * sample_rate as f64).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate as f64;
            (amplitude * (std::f64::consts::TAU * freq_hz * t).sin()) as f32
        })
        .collect();
    AudioClip {
        samples,
        sample_rate,
    }
}

/// `n_classes` isotropic Gaussian clusters centred at `separation * e_c`
/// (requires `dim >= n_classes`), `n_per_class` points each.
pub fn gaussian_clusters(
    n_classes: usize,
    n_per_class: usize,
    dim: usize,
    separation: f64,
    sigma: f64,
    seed: u64,
) -> Result<LabeledSet> {
    if dim < n_classes {
        return Err(Error::invalid(format!(
            "{n_classes} orthogonal cluster centres need dim >= {n_classes}, got {dim}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let n = n_classes * n_per_class;
    let mut features = Array2::zeros((n, dim));
    let mut labels = Vec::with_capacity(n);
    for c in 0..n_classes {
        for i in 0..n_per_class {
            let row = c * n_per_class + i;
            for j in 0..dim {
                let centre = if j == c { separation } else { 0.0 };
                features[[row, j]] = (centre + sigma * rng.normal()) as f32;
            }
            labels.push(c);
        }
    }
    LabeledSet::new(features, labels)
}

/// Per-class seeded split of a labeled set into `(train, val)`; each class
/// contributes `round(count * train_fraction)` rows to train.
pub fn stratified_split(
    set: &LabeledSet,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledSet, LabeledSet)> {
    let n_classes = set.labels.iter().max().map_or(0, |&m| m + 1);
    let mut rng = SplitMix64::new(seed);
    let (mut train_idx, mut val_idx) = (Vec::new(), Vec::new());
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] == c).collect();
        rng.shuffle(&mut members);
        let cut = (members.len() as f64 * train_fraction).round() as usize;
        train_idx.extend_from_slice(&members[..cut]);
        val_idx.extend_from_slice(&members[cut..]);
    }
    let take = |idx: &[usize]| {
        let mut features = Array2::zeros((idx.len(), set.dim()));
        for (r, &i) in idx.iter().enumerate() {
            features.row_mut(r).assign(&set.features.row(i));
        }
        LabeledSet::new(features, idx.iter().map(|&i| set.labels[i]).collect())
    };
    Ok((take(&train_idx)?, take(&val_idx)?))
}

/// Non-command words written into the mini corpus (they land in `unknown`).
pub const FILLER_WORDS: [&str; 3] = ["bed", "cat", "tree"];

/// A tone "word": two partials with a short glide and a smooth envelope.
fn synth_word(base_hz: f64, glide: f64, rng: &mut SplitMix64, rate: u32) -> AudioClip {
    let duration = rng.uniform(0.55, 0.95);
    let jitter = rng.uniform(0.97, 1.03);
    let amp = rng.uniform(0.2, 0.5);
    let n = (duration * rate as f64) as usize;
    let f1 = base_hz * jitter;
    let f2 = 2.0 * f1 + 450.0;
    let (mut p1, mut p2) = (0.0f64, 0.0f64);
    let samples = (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            let sweep = 1.0 + glide * x;
            p1 += std::f64::consts::TAU * f1 * sweep / rate as f64;
            p2 += std::f64::consts::TAU * f2 * sweep / rate as f64;
            let env = (std::f64::consts::PI * x).sin().powi(2);
            let hiss = 0.01 * rng.normal();
            (amp * env * (p1.sin() + 0.5 * p2.sin()) / 1.5 + hiss) as f32
        })
        .collect();
    AudioClip {
        samples,
        sample_rate: rate,
    }
}

/// Write a miniature corpus under `root`: `clips_per_word` WAVs for each
/// command and filler word (16 kHz, under one second) plus two 20-second
/// background noise recordings.
pub fn write_mini_corpus(root: &Path, clips_per_word: usize, seed: u64) -> Result<()> {
    let rate = 16_000;
    let mut rng = SplitMix64::new(seed);
    let words = COMMANDS.iter().chain(FILLER_WORDS.iter()).enumerate();
    for (w, word) in words {
        let dir = root.join(word);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let base = 220.0 + 170.0 * w as f64;
        let glide = if w % 2 == 0 { 0.25 } else { -0.2 };
        for i in 0..clips_per_word {
            let clip = synth_word(base, glide, &mut rng, rate);
            write_wav(&dir.join(format!("{w:02}{i:04x}_nohash_0.wav")), &clip)?;
        }
    }

    let noise_dir = root.join(NOISE_DIR);
    fs::create_dir_all(&noise_dir).map_err(|e| Error::io(&noise_dir, e))?;
    let n = 20 * rate as usize;
    let white: Vec<f32> = (0..n).map(|_| (0.1 * rng.normal()) as f32).collect();
    let mut level = 0.0f64;
    let brown: Vec<f32> = (0..n)
        .map(|_| {
            level = 0.995 * level + 0.02 * rng.normal();
            level.clamp(-1.0, 1.0) as f32
        })
        .collect();
    write_wav(
        &noise_dir.join("white_noise.wav"),
        &AudioClip::new(white, rate)?,
    )?;
    write_wav(
        &noise_dir.join("brown_noise.wav"),
        &AudioClip::new(brown, rate)?,
    )?;
    Ok(())
}
