use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Window length, hop and FFT size in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftParams {
    pub window_length: usize,
    pub hop: usize,
    pub fft_length: usize,
}

impl StftParams {
    /// 2 s window, hop of a tenth of a second, FFT padded to twice the next
    /// power of two.
    pub fn for_sample_rate(sample_rate: f64) -> Self {
        let window_length = ((2.0 * sample_rate).round() as usize).max(2);
        let hop = ((sample_rate / 10.0).round() as usize).max(1);
        Self {
            window_length,
            hop,
            fft_length: 2 * window_length.next_power_of_two(),
        }
    }
}

/// `|V(t, ξ)|²`, one row per frame, one column per frequency bin
/// `0 ..= fft_length / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub matrix: Vec<Vec<f64>>,
    /// Seconds between frame centers.
    pub time_step: f64,
    /// Hz between frequency bins.
    pub freq_step: f64,
    /// Time of the first frame center.
    pub start_time: f64,
    /// Length of the analyzed signal in seconds.
    pub signal_duration: f64,
    pub window_descriptor: String,
}

impl Spectrogram {
    pub fn frames(&self) -> usize {
        self.matrix.len()
    }

    pub fn bins(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.freq_step
    }

    /// Per-frame frequency of the largest entry among bins `first_bin..`.
    pub fn ridge(&self, first_bin: usize) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| {
                let k = row
                    .iter()
                    .enumerate()
                    .skip(first_bin)
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map_or(0, |(k, _)| k);
                self.frequency(k)
            })
            .collect()
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            matrix: self
                .matrix
                .iter()
                .map(|row| row.iter().map(|&v| f(v)).collect())
                .collect(),
            ..self.clone()
        }
    }
}

/// Gaussian taps, `σ = L / 8`, truncated at `±4σ`; tap `m` sits at offset
/// `m − L/2` from the frame center.
fn gaussian_window(length: usize) -> Vec<f64> {
    let sigma = length as f64 / 8.0;
    let center = (length / 2) as f64;
    (0..length)
        .map(|m| {
            let u = (m as f64 - center) / sigma;
            (-0.5 * u * u).exp()
        })
        .collect()
}

/// Short-time Fourier transform with centered, zero-padded frames at
/// sample positions `0, hop, 2·hop, …`.
pub fn stft(signal: &SampledSignal, params: StftParams) -> Result<Spectrogram> {
    let StftParams {
        window_length,
        hop,
        fft_length,
    } = params;
    if window_length == 0 || hop == 0 || window_length > fft_length {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= window_length <= fft_length and hop >= 1, got {params:?}"
        )));
    }
    let x = signal.samples();
    if x.len() < window_length {
        return Err(Error::SignalTooShort {
            len: x.len(),
            window: window_length,
        });
    }
    let window = gaussian_window(window_length);
    let half = (window_length / 2) as isize;
    let frames = (x.len() - 1) / hop + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_length);

    let matrix: Vec<Vec<f64>> = (0..frames)
        .into_par_iter()
        .map(|j| {
            let center = (j * hop) as isize;
            let mut buffer = vec![Complex64::default(); fft_length];
            for (m, w) in window.iter().enumerate() {
                let idx = center - half + m as isize;
                if idx >= 0 && (idx as usize) < x.len() {
                    buffer[m] = Complex64::new(x[idx as usize] * w, 0.0);
                }
            }
            fft.process(&mut buffer);
            buffer[..=fft_length / 2].iter().map(|c| c.norm_sqr()).collect()
        })
        .collect();

    let rate = signal.sample_rate();
    Ok(Spectrogram {
        matrix,
        time_step: hop as f64 / rate,
        freq_step: rate / fft_length as f64,
        start_time: signal.start_time(),
        signal_duration: signal.duration(),
        window_descriptor: format!(
            "gaussian(sigma=L/8, truncated +-4 sigma) L={window_length} hop={hop} nfft={fft_length}"
        ),
    })
}

/// Percentile with linear interpolation between order statistics of
/// already-sorted data, position `p/100 · (n − 1)`.
pub fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = pct / 100.0 * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Clips every entry to the `[lo_pct, hi_pct]` percentile range of the
/// flattened matrix.
pub fn dynamic_range_clip(spectrogram: &Spectrogram, lo_pct: f64, hi_pct: f64) -> Result<Spectrogram> {
    if !(0.0..100.0).contains(&lo_pct) || !(lo_pct < hi_pct && hi_pct <= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= lo < hi <= 100, got lo = {lo_pct}, hi = {hi_pct}"
        )));
    }
    let (lo, hi) = clip_bounds(spectrogram, lo_pct, hi_pct);
    Ok(clip_to(spectrogram, lo, hi))
}

/// Clamps every entry to `[lo, hi]`.
pub fn clip_to(spectrogram: &Spectrogram, lo: f64, hi: f64) -> Spectrogram {
    spectrogram.map(|v| v.clamp(lo, hi))
}

/// `(P_lo, P_hi)` of the flattened matrix.
pub fn clip_bounds(spectrogram: &Spectrogram, lo_pct: f64, hi_pct: f64) -> (f64, f64) {
    let mut flat: Vec<f64> = spectrogram.matrix.iter().flatten().copied().collect();
    if flat.is_empty() {
        return (0.0, 0.0);
    }
    flat.sort_by(f64::total_cmp);
    (percentile(&flat, lo_pct), percentile(&flat, hi_pct))
}

/// Share of spectrogram energy within `half_width` Hz of the supplied
/// instantaneous-frequency curve, relative to the energy in
/// `[band_floor, band_ceiling]` (defaults: `1/T` and Nyquist).
pub fn band_energy_ratio(
    spectrogram: &Spectrogram,
    if_curve: &[f64],
    half_width: f64,
    band_floor: Option<f64>,
    band_ceiling: Option<f64>,
) -> Result<f64> {
    if if_curve.len() != spectrogram.frames() {
        return Err(Error::InvalidArgument(format!(
            "IF curve has {} points for {} frames",
            if_curve.len(),
            spectrogram.frames()
        )));
    }
    if !(half_width > 0.0) {
        return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
    }
    let floor = band_floor.unwrap_or(1.0 / spectrogram.signal_duration);
    let ceiling = band_ceiling.unwrap_or(spectrogram.frequency(spectrogram.bins().saturating_sub(1)));

    let mut inside = 0.0;
    let mut total = 0.0;
    for (frame, (row, &center)) in spectrogram.matrix.iter().zip(if_curve).enumerate() {
        let mut hit = false;
        for (k, &v) in row.iter().enumerate() {
            let xi = spectrogram.frequency(k);
            if xi >= center - half_width && xi <= center + half_width {
                inside += v;
                hit = true;
            }
            if xi >= floor && xi <= ceiling {
                total += v;
            }
        }
        if !hit {
            return Err(Error::EmptyBand { frame, center });
        }
    }
    if total == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(inside / total)
}
