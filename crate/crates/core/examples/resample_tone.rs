//! Resample a 440 Hz tone from 44.1 kHz to 16 kHz and locate its spectral
//! peak.
//!
//! ```text
//! cargo run --example resample_tone -- [source_rate]
//! ```

use speechcmd::dsp::{frame, resample, stft_power, FrameConfig, KAISER_BETA, SINC_HALF_LEN};
use speechcmd::synth::tone;

fn main() -> speechcmd::Result<()> {
    let src: u32 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(44_100);
    let clip = tone(440.0, 1.0, src, 0.5);
    let out = resample(&clip, 16_000)?;
    println!("kaiser beta {KAISER_BETA}, {SINC_HALF_LEN} taps per side");
    println!(
        "{} samples @ {src} Hz -> {} samples @ 16000 Hz",
        clip.len(),
        out.len()
    );
    println!("rms before {:.5}, after {:.5}", clip.rms(), out.rms());

    let frames = frame(&out, &FrameConfig::default())?;
    let spec = stft_power(&frames, 16_000)?;
    let row = spec.values.row(frames.len() / 2);
    let (peak, power) = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    println!(
        "peak bin {peak} ({:.1} Hz, bin width {:.1} Hz), power {power:.3}",
        peak as f64 * spec.bin_hz,
        spec.bin_hz
    );
    Ok(())
}
