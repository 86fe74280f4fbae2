use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::Frames;
use crate::error::{Error, Result};

/// One-sided power spectrogram, `[n_frames x (frame_len / 2 + 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub values: Array2<f64>,
    /// Bin spacing in Hz (`sample_rate / frame_len`).
    pub bin_hz: f64,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.values.ncols()
    }
}

/// Symmetric Hann window: `0.5 * (1 - cos(2 pi n / (len - 1)))`.
pub fn hann_window(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.5 * (1.0 - (std::f64::consts::TAU * n as f64 / denom).cos()))
        .collect()
}

/// Windowed power spectrum of every frame.
///
/// The transform length equals the frame length (no zero padding), and only
/// bins `0..=frame_len / 2` are kept.
pub fn stft_power(frames: &Frames, sample_rate: u32) -> Result<Spectrogram> {
    if frames.is_empty() {
        return Err(Error::invalid("no frames to transform"));
    }
    if sample_rate == 0 {
        return Err(Error::invalid("sample rate must be positive"));
    }
    let n = frames.frame_len();
    let n_bins = n / 2 + 1;
    let window = hann_window(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex::default(); n];
    let mut values = Array2::zeros((frames.len(), n_bins));

    for (m, frame) in frames.iter().enumerate() {
        for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&window) {
            *b = Complex::new(x * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (k, out) in values.row_mut(m).iter_mut().enumerate() {
            *out = buf[k].norm_sqr();
        }
    }

    Ok(Spectrogram {
        values,
        bin_hz: sample_rate as f64 / n as f64,
    })
}
