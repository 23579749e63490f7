//! Spectrogram file formats.
//!
//! CSV: a header line `time_s,<f_0>,<f_1>,…` listing bin frequencies in Hz,
//! then one line per frame: the frame-center time followed by the `|V|²`
//! entries. Every number is written by [`format_float`] and lines end in `\n`.
//!
//! PGM: binary `P5`, header `P5\n<frames> <bins>\n255\n`, then `bins` rows of
//! `frames` bytes. Row 0 is the highest frequency bin, column 0 the first
//! frame. Entries are first clipped to the `[lo, hi]` percentile range and
//! mapped to `round(255 · (v − lo) / (hi − lo))`; a flat range maps to 0.

use std::fmt::Write;

use super::stft::{clip_bounds, Spectrogram};
use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits, enough to round-trip
/// any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_spectrogram_csv(spectrogram: &Spectrogram) -> String {
    let mut out = String::from("time_s");
    for k in 0..spectrogram.bins() {
        out.push(',');
        out.push_str(&format_float(spectrogram.frequency(k)));
    }
    out.push('\n');
    for (j, row) in spectrogram.matrix.iter().enumerate() {
        let t = spectrogram.start_time + j as f64 * spectrogram.time_step;
        out.push_str(&format_float(t));
        for v in row {
            let _ = write!(out, ",{}", format_float(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_pgm(spectrogram: &Spectrogram, lo_pct: f64, hi_pct: f64) -> Result<Vec<u8>> {
    if !(0.0..100.0).contains(&lo_pct) || !(lo_pct < hi_pct && hi_pct <= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= lo < hi <= 100, got lo = {lo_pct}, hi = {hi_pct}"
        )));
    }
    let (lo, hi) = clip_bounds(spectrogram, lo_pct, hi_pct);
    let (frames, bins) = (spectrogram.frames(), spectrogram.bins());
    let mut out = format!("P5\n{frames} {bins}\n255\n").into_bytes();
    out.reserve(frames * bins);
    for k in (0..bins).rev() {
        for row in &spectrogram.matrix {
            let v = row[k].clamp(lo, hi);
            let level = if hi > lo {
                (255.0 * (v - lo) / (hi - lo)).round() as u8
            } else {
                0
            };
            out.push(level);
        }
    }
    Ok(out)
}
