//! Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.

use super::AudioClip;
use crate::error::{Error, Result};

pub const KAISER_BETA: f64 = 8.0;
/// Taps on each side of the interpolation point.
pub const SINC_HALF_LEN: usize = 32;
/// Passband edge as a fraction of the lower Nyquist rate.
const ROLLOFF: f64 = 0.95;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Modified Bessel function of the first kind, order zero.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

struct PolyphaseBank {
    /// `phases[p][j]` weights input sample `floor(t) - HALF + 1 + j` for an
    /// output instant with fractional position `p / up`.
    phases: Vec<Vec<f64>>,
}

impl PolyphaseBank {
    fn new(up: u64, cutoff: f64) -> Self {
        let half = SINC_HALF_LEN as f64;
        let norm = bessel_i0(KAISER_BETA);
        let phases = (0..up)
            .map(|p| {
                let frac = p as f64 / up as f64;
                (0..2 * SINC_HALF_LEN)
                    .map(|j| {
                        let x = (j as f64 - half + 1.0) - frac;
                        let r = x / half;
                        if r.abs() > 1.0 {
                            return 0.0;
                        }
                        let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / norm;
                        cutoff * sinc(cutoff * x) * window
                    })
                    .collect()
            })
            .collect();
        Self { phases }
    }
}

/// Resample `clip` to `target_rate`.
///
/// Output length is `round(len * target_rate / clip.sample_rate)`. Equal
/// rates return the input unchanged.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if clip.is_empty() {
        return Err(Error::invalid("cannot resample an empty clip"));
    }
    if target_rate == 0 || clip.sample_rate == 0 {
        return Err(Error::invalid("sample rates must be positive"));
    }
    if target_rate == clip.sample_rate {
        return Ok(clip.clone());
    }

    let g = gcd(target_rate as u64, clip.sample_rate as u64);
    let up = target_rate as u64 / g;
    let down = clip.sample_rate as u64 / g;
    let len = clip.len() as u64;
    let out_len = ((2 * len * up + down) / (2 * down)) as usize;

    let cutoff = ROLLOFF * (up as f64 / down as f64).min(1.0);
    let bank = PolyphaseBank::new(up, cutoff);
    let input = &clip.samples;
    let n_in = input.len() as i64;

    let samples = (0..out_len as u64)
        .map(|n| {
            let pos = n * down;
            let base = (pos / up) as i64;
            let taps = &bank.phases[(pos % up) as usize];
            let first = base - SINC_HALF_LEN as i64 + 1;
            let mut acc = 0.0f64;
            for (j, &h) in taps.iter().enumerate() {
                let idx = first + j as i64;
                if (0..n_in).contains(&idx) {
                    acc += h * input[idx as usize] as f64;
                }
            }
            acc as f32
        })
        .collect();

    Ok(AudioClip {
        samples,
        sample_rate: target_rate,
    })
}
