use ndarray::Array2;

use super::Spectrogram;
use crate::error::{Error, Result};

/// Hz to mel: `2595 * log10(1 + f / 700)`.
pub fn hz_to_mel(hz: f64) -> Result<f64> {
    if hz.is_nan() || hz < 0.0 {
        return Err(Error::invalid(format!(
            "frequency must be non-negative, got {hz}"
        )));
    }
    Ok(2595.0 * (1.0 + hz / 700.0).log10())
}

/// Inverse of [`hz_to_mel`].
pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters, peak weight 1, edges equally spaced on the mel axis.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// `[n_bands x n_bins]`.
    pub weights: Array2<f64>,
    /// Center frequency of each band, Hz.
    pub centers_hz: Vec<f64>,
    pub f_min: f64,
    pub f_max: f64,
}

/// Filterbank spanning `0 .. sample_rate / 2` over a one-sided spectrum of
/// `n_bins` bins (transform length `2 * (n_bins - 1)`).
pub fn build_filterbank(n_bands: usize, n_bins: usize, sample_rate: u32) -> Result<MelFilterbank> {
    MelFilterbank::new(n_bands, n_bins, sample_rate, 0.0, sample_rate as f64 / 2.0)
}

impl MelFilterbank {
    pub fn new(
        n_bands: usize,
        n_bins: usize,
        sample_rate: u32,
        f_min: f64,
        f_max: f64,
    ) -> Result<Self> {
        if n_bands == 0 {
            return Err(Error::invalid("filterbank needs at least one band"));
        }
        if n_bins < n_bands + 2 {
            return Err(Error::invalid(format!(
                "{n_bins} bins cannot resolve {n_bands} bands (need at least {})",
                n_bands + 2
            )));
        }
        if !(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate as f64 / 2.0) {
            return Err(Error::invalid(format!(
                "band edges must satisfy 0 <= f_min < f_max <= Nyquist, got {f_min}..{f_max}"
            )));
        }
        let n_fft = 2 * (n_bins - 1);
        let bin_hz = sample_rate as f64 / n_fft as f64;

        let (mel_lo, mel_hi) = (hz_to_mel(f_min)?, hz_to_mel(f_max)?);
        let step = (mel_hi - mel_lo) / (n_bands + 1) as f64;
        let edges: Vec<f64> = (0..n_bands + 2)
            .map(|i| mel_to_hz(mel_lo + step * i as f64))
            .collect();

        let mut weights = Array2::zeros((n_bands, n_bins));
        for b in 0..n_bands {
            let (lo, center, hi) = (edges[b], edges[b + 1], edges[b + 2]);
            for k in 0..n_bins {
                let f = k as f64 * bin_hz;
                let w = if f > lo && f <= center {
                    (f - lo) / (center - lo)
                } else if f > center && f < hi {
                    (hi - f) / (hi - center)
                } else {
                    0.0
                };
                weights[[b, k]] = w;
            }
            if weights.row(b).iter().all(|&w| w == 0.0) {
                return Err(Error::invalid(format!(
                    "band {b} ({lo:.1}..{hi:.1} Hz) falls between bins spaced {bin_hz:.1} Hz"
                )));
            }
        }

        Ok(Self {
            weights,
            centers_hz: edges[1..=n_bands].to_vec(),
            f_min,
            f_max,
        })
    }

    pub fn n_bands(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.weights.ncols()
    }

    /// Band energies, `[n_frames x n_bands]`.
    pub fn apply(&self, spec: &Spectrogram) -> Result<Array2<f64>> {
        if spec.n_bins() != self.n_bins() {
            return Err(Error::invalid(format!(
                "spectrogram has {} bins, filterbank expects {}",
                spec.n_bins(),
                self.n_bins()
            )));
        }
        Ok(spec.values.dot(&self.weights.t()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_reference_points() {
        assert_eq!(hz_to_mel(0.0).unwrap(), 0.0);
        let m700 = hz_to_mel(700.0).unwrap();
        assert!((m700 - 2595.0 * 2f64.log10()).abs() < 1e-12);
        assert!((m700 - 781.17).abs() < 0.01);
        let m8k = hz_to_mel(8000.0).unwrap();
        assert!((m8k - 2840.0).abs() < 0.05, "{m8k}");
    }

    #[test]
    fn negative_frequency_rejected() {
        assert!(hz_to_mel(-1.0).is_err());
        assert!(hz_to_mel(f64::NAN).is_err());
    }

    #[test]
    fn single_band_peaks_at_mel_midpoint() {
        let fb = build_filterbank(1, 201, 16_000).unwrap();
        let expected = mel_to_hz(hz_to_mel(8000.0).unwrap() / 2.0);
        assert!((fb.centers_hz[0] - expected).abs() < 1e-9);
        // Weight at the bin nearest the center is close to the peak.
        let k = (expected / 40.0).round() as usize;
        assert!(fb.weights[[0, k]] > 0.95);
        assert!(fb.weights.iter().all(|&w| (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn fifty_bands_well_formed() {
        let fb = build_filterbank(50, 201, 16_000).unwrap();
        assert_eq!(fb.weights.dim(), (50, 201));
        assert!(fb.centers_hz.windows(2).all(|w| w[0] < w[1]));
        for row in fb.weights.rows() {
            assert!(row.iter().all(|&w| (0.0..=1.0).contains(&w)));
            assert!(row.iter().any(|&w| w > 0.0));
        }
    }

    #[test]
    fn flat_row_sums_weights() {
        let fb = build_filterbank(50, 201, 16_000).unwrap();
        let spec = Spectrogram {
            values: Array2::ones((1, 201)),
            bin_hz: 40.0,
        };
        let out = fb.apply(&spec).unwrap();
        for b in 0..50 {
            let expected: f64 = fb.weights.row(b).sum();
            assert!((out[[0, b]] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_bins_rejected() {
        assert!(build_filterbank(50, 51, 16_000).is_err());
        assert!(build_filterbank(0, 201, 16_000).is_err());
    }
}
