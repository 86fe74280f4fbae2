//! Turn a WAV file (or a synthetic chirp) into log-mel patches.
//!
//! ```text
//! cargo run --example featurize_clip -- [clip.wav] [out.fpz]
//! ```

use std::path::PathBuf;

use speechcmd::audio::read_wav;
use speechcmd::dsp::{featurize, AudioClip};
use speechcmd::storage::{write_patches, PatchSet};

fn chirp() -> AudioClip {
    let rate = 22_050;
    let n = (2.5 * rate as f64) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate as f64;
            (0.3 * (std::f64::consts::TAU * (200.0 * t + 600.0 * t * t)).sin()) as f32
        })
        .collect();
    AudioClip {
        samples,
        sample_rate: rate,
    }
}

fn main() -> speechcmd::Result<()> {
    let mut args = std::env::args().skip(1);
    let (clip, id) = match args.next() {
        Some(path) => (read_wav(&PathBuf::from(&path))?, path),
        None => (chirp(), "chirp".to_string()),
    };
    println!(
        "{id}: {} samples @ {} Hz ({:.3} s)",
        clip.len(),
        clip.sample_rate,
        clip.duration_s()
    );

    let patches = featurize(&clip, &id)?;
    for p in &patches {
        let (lo, hi) = p
            .values
            .iter()
            .fold((f32::MAX, f32::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let loudest = p
            .values
            .mean_axis(ndarray::Axis(0))
            .expect("patch has frames")
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(b, _)| b)
            .unwrap_or(0);
        println!(
            "segment {}: {:?}, log-mel range [{lo:.2}, {hi:.2}], loudest band {loudest}",
            p.segment_index,
            p.values.dim()
        );
    }

    if let Some(out) = args.next() {
        let set = PatchSet::from_patches(98, 50, &patches)?;
        write_patches(&set, &PathBuf::from(&out))?;
        println!("wrote {} patches to {out}", set.len());
    }
    Ok(())
}
