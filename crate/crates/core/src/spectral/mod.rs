//! Fourier analysis of sampled signals: amplitude-normalized DFT, the
//! fundamental-component energy ratio, short-time spectrograms and their
//! file exports.

mod export;
mod stft;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

pub use export::{format_float, write_pgm, write_spectrogram_csv};
pub use stft::{
    band_energy_ratio, clip_bounds, clip_to, dynamic_range_clip, percentile, stft, Spectrogram, StftParams,
};

/// One-sided spectrum `c_0 ..= c_{N/2}`, scaled so a unit cosine on an
/// integer number of periods has `|c_l| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    /// Hz per bin, `sample_rate / N`.
    pub bin_width: f64,
}

impl Spectrum {
    pub fn highest_bin(&self) -> usize {
        self.bins.len() - 1
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|c| c.norm()).collect()
    }

    /// Index of the largest non-DC bin.
    pub fn dominant_bin(&self) -> Option<usize> {
        self.bins
            .iter()
            .enumerate()
            .skip(1)
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, _)| k)
    }
}

fn fft_in_place(buffer: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buffer.len())
    } else {
        planner.plan_fft_forward(buffer.len())
    };
    fft.process(buffer);
}

/// `c_0 = (1/N) Σ x_n`, `c_l = (2/N) Σ x_n exp(−2πi l n / N)` for `l ≥ 1`.
pub fn dft(signal: &SampledSignal) -> Spectrum {
    let x = signal.samples();
    let n = x.len();
    let mut buffer: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buffer, false);
    let scale = 2.0 / n as f64;
    let mut bins: Vec<Complex64> = buffer[..=n / 2].iter().map(|c| c * scale).collect();
    bins[0] = buffer[0] / n as f64;
    Spectrum {
        bins,
        bin_width: signal.sample_rate() / n as f64,
    }
}

/// `|c_f|² / Σ_{l=1}^{max_bin} |c_l|²`. DC is excluded from both sides.
pub fn fundamental_energy_ratio(
    spectrum: &Spectrum,
    fundamental_bin: usize,
    max_bin: usize,
) -> Result<f64> {
    if fundamental_bin == 0 || fundamental_bin > max_bin {
        return Err(Error::InvalidArgument(format!(
            "fundamental bin {fundamental_bin} must lie in 1..={max_bin}"
        )));
    }
    if max_bin > spectrum.highest_bin() {
        return Err(Error::InvalidArgument(format!(
            "max bin {max_bin} exceeds the highest bin {}",
            spectrum.highest_bin()
        )));
    }
    let total: f64 = spectrum.bins[1..=max_bin].iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(spectrum.bins[fundamental_bin].norm_sqr() / total)
}

/// Zeroes DFT bins `±k` for every listed `k ≥ 1` and transforms back.
pub fn remove_bins(signal: &SampledSignal, bins: &[usize]) -> Result<SampledSignal> {
    let n = signal.len();
    let mut buffer: Vec<Complex64> = signal
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_in_place(&mut buffer, false);
    for &k in bins {
        if k == 0 || k > n / 2 {
            return Err(Error::InvalidArgument(format!("bin {k} outside 1..={}", n / 2)));
        }
        buffer[k] = Complex64::default();
        buffer[n - k] = Complex64::default();
    }
    fft_in_place(&mut buffer, true);
    let samples = buffer.iter().map(|c| c.re / n as f64).collect();
    signal.with_samples(samples)
}
