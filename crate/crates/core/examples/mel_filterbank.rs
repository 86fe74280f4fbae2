//! Print the default 50-band mel filterbank: centre frequencies, widths and
//! per-band weight sums.

use speechcmd::dsp::{build_filterbank, hz_to_mel, mel_to_hz};

fn main() -> speechcmd::Result<()> {
    for f in [0.0, 700.0, 1000.0, 4000.0, 8000.0] {
        let m = hz_to_mel(f)?;
        println!("{f:>7.1} Hz -> {m:>8.3} mel -> {:>7.1} Hz", mel_to_hz(m));
    }

    let fb = build_filterbank(50, 201, 16_000)?;
    println!("\nband  centre_hz  nonzero_bins  weight_sum");
    for (b, row) in fb.weights.rows().into_iter().enumerate() {
        let nonzero = row.iter().filter(|&&w| w > 0.0).count();
        println!(
            "{b:>4}  {:>9.1}  {nonzero:>12}  {:>10.4}",
            fb.centers_hz[b],
            row.sum()
        );
    }
    Ok(())
}
