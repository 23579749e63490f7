use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fundamental_core::spectral::{
    band_energy_ratio, clip_bounds, dynamic_range_clip, format_float, stft, write_pgm, write_spectrogram_csv,
    StftParams,
};
use fundamental_core::{apply, dft, fundamental_energy_ratio, support_gcd_relative, ActivationSpec, SampledSignal};
use serde::Serialize;

use crate::failure::{CliResult, Failure};
use crate::io;
use crate::manifest::{write_json, RunManifest};

const CLIP_LO_PCT: f64 = 0.0;
const CLIP_HI_PCT: f64 = 99.95;
/// Bins below this fraction of the largest non-DC magnitude are ignored
/// when reading off a support; aliasing of the activated signal leaves a
/// floor well above rounding noise.
const SUPPORT_THRESHOLD: f64 = 1e-2;
const MAX_RATIO_BIN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActivationKind {
    Abs,
    Relu,
    Heps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Pgm,
    Json,
}

impl ExportFormat {
    fn file_name(self) -> &'static str {
        match self {
            Self::Csv => "spectrogram.csv",
            Self::Pgm => "spectrogram.pgm",
            Self::Json => "spectrogram.json",
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Signal file: CSV (`sample_rate,<Hz>` header, then one sample per line)
    /// or WAV (16/24/32-bit integer PCM or 32-bit float; first channel;
    /// integers divided by 2^(bits-1) so samples lie in [-1, 1]).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "heps")]
    pub activation: ActivationKind,
    /// ε of the adaptive reciprocal activation.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// STFT window length in samples [default: 2 s of signal].
    #[arg(long)]
    pub window: Option<usize>,
    /// STFT hop in samples [default: 0.1 s of signal].
    #[arg(long)]
    pub hop: Option<usize>,
    /// FFT length in samples [default: twice the next power of two above the window].
    #[arg(long)]
    pub fft_length: Option<usize>,
    /// Spectrogram formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,pgm")]
    pub export: Vec<ExportFormat>,
    /// Instantaneous-frequency curve, one value in Hz per spectrogram frame.
    #[arg(long)]
    pub if_curve: Option<PathBuf>,
    /// Half width in Hz of the band around the IF curve.
    #[arg(long, default_value_t = 0.2)]
    pub half_width: f64,
    /// Bin whose energy share is reported.
    #[arg(long, default_value_t = 1)]
    pub fundamental_bin: usize,
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct EnergyRatio {
    bin: usize,
    max_bin: usize,
    before: Option<f64>,
    after: Option<f64>,
}

#[derive(Serialize)]
struct ClipRange {
    lo_pct: f64,
    hi_pct: f64,
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct BandRatio {
    half_width: f64,
    value: f64,
}

#[derive(Serialize)]
struct Report {
    activation: String,
    sample_rate: f64,
    samples: usize,
    duration_s: f64,
    energy_ratio: EnergyRatio,
    support_gcd: Option<u64>,
    lowest_significant_bin: Option<usize>,
    /// Strongest activated bin among `1 ..= lowest significant input bin`.
    dominant_low_bin: Option<usize>,
    dominant_bin: Option<usize>,
    stft: StftParams,
    frames: usize,
    clip: ClipRange,
    band_energy_ratio: Option<BandRatio>,
}

fn activation_spec(args: &AnalyzeArgs) -> CliResult<ActivationSpec> {
    Ok(match args.activation {
        ActivationKind::Abs => ActivationSpec::Abs,
        ActivationKind::Relu => ActivationSpec::Relu,
        ActivationKind::Heps => ActivationSpec::adaptive(args.epsilon)?,
    })
}

/// Defaults scale with the sample rate; a signal shorter than the default
/// window is analyzed with a single window covering all of it.
fn stft_params(args: &AnalyzeArgs, signal: &SampledSignal) -> StftParams {
    let mut p = StftParams::for_sample_rate(signal.sample_rate());
    if args.window.is_none() && p.window_length > signal.len() {
        p.window_length = signal.len();
        p.fft_length = 2 * p.window_length.next_power_of_two();
    }
    if let Some(w) = args.window {
        p.window_length = w;
        p.fft_length = 2 * w.next_power_of_two();
    }
    if let Some(h) = args.hop {
        p.hop = h;
    }
    if let Some(n) = args.fft_length {
        p.fft_length = n;
    }
    p
}

pub fn run(args: &AnalyzeArgs) -> CliResult<()> {
    let spec = activation_spec(args)?;
    if args.fundamental_bin == 0 {
        return Err(Failure::usage("--fundamental-bin must be at least 1"));
    }
    let bytes = io::read_bytes(&args.input)?;
    let signal = io::parse_signal(&bytes).map_err(|e| e.context(format!("reading {}", args.input.display())))?;

    let activated = apply(spec, &signal, None)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("activated.csv"), io::signal_csv(&activated))?;

    let before = dft(&signal);
    let after = dft(&activated);
    let max_bin = (signal.len() / 2).min(MAX_RATIO_BIN);
    let bin = args.fundamental_bin;
    let ratio = |s| (bin <= max_bin).then(|| fundamental_energy_ratio(s, bin, max_bin).ok()).flatten();
    fs::write(args.out.join("spectrum.csv"), spectrum_csv(&before, &after))?;

    // The activations are nonnegative; the mean would otherwise swamp the
    // low rows of the spectrogram.
    let mean = activated.samples().iter().sum::<f64>() / activated.len() as f64;
    let centered = activated.with_samples(activated.samples().iter().map(|v| v - mean).collect())?;
    let params = stft_params(args, &centered);
    let spectrogram = stft(&centered, params)?;
    let clipped = dynamic_range_clip(&spectrogram, CLIP_LO_PCT, CLIP_HI_PCT)?;
    let (lo, hi) = clip_bounds(&spectrogram, CLIP_LO_PCT, CLIP_HI_PCT);
    for format in &args.export {
        let path = args.out.join(format.file_name());
        match format {
            ExportFormat::Csv => fs::write(path, write_spectrogram_csv(&clipped))?,
            ExportFormat::Pgm => fs::write(path, write_pgm(&spectrogram, CLIP_LO_PCT, CLIP_HI_PCT)?)?,
            ExportFormat::Json => write_json(&path, &clipped)?,
        }
    }

    let band = match &args.if_curve {
        Some(path) => {
            let curve = io::parse_curve(&io::read_bytes(path)?)?;
            if curve.len() != spectrogram.frames() {
                return Err(Failure::input(format!(
                    "IF curve has {} values but the spectrogram has {} frames",
                    curve.len(),
                    spectrogram.frames()
                )));
            }
            let value = band_energy_ratio(&spectrogram, &curve, args.half_width, None, None)?;
            Some(BandRatio {
                half_width: args.half_width,
                value,
            })
        }
        None => None,
    };

    let input_lowest = lowest_significant_bin(&before.magnitudes());
    let magnitudes = after.magnitudes();
    let report = Report {
        activation: spec.label(),
        sample_rate: signal.sample_rate(),
        samples: signal.len(),
        duration_s: signal.duration(),
        energy_ratio: EnergyRatio {
            bin,
            max_bin,
            before: ratio(&before),
            after: ratio(&after),
        },
        support_gcd: support_gcd_relative(&after.bins, SUPPORT_THRESHOLD).ok(),
        lowest_significant_bin: lowest_significant_bin(&magnitudes),
        dominant_low_bin: input_lowest.map(|top| {
            (1..=top)
                .max_by(|&a, &b| magnitudes[a].total_cmp(&magnitudes[b]))
                .expect("top >= 1")
        }),
        dominant_bin: after.dominant_bin(),
        stft: params,
        frames: spectrogram.frames(),
        clip: ClipRange {
            lo_pct: CLIP_LO_PCT,
            hi_pct: CLIP_HI_PCT,
            lo,
            hi,
        },
        band_energy_ratio: band,
    };
    write_json(&args.out.join("report.json"), &report)?;

    let mut manifest = RunManifest::new("analyze");
    manifest
        .set("input", args.input.display().to_string())
        .set("activation", spec)
        .set("stft", params)
        .set("export", &args.export)
        .set("half_width", args.half_width)
        .set("fundamental_bin", bin)
        .set("clip_percentiles", [CLIP_LO_PCT, CLIP_HI_PCT]);
    if let Some(p) = &args.if_curve {
        manifest.set("if_curve_digest", io::sha256_hex(&io::read_bytes(p)?));
    }
    manifest.input_digest = Some(io::sha256_hex(&bytes));
    manifest.write(&args.out)?;

    println!(
        "{}: fundamental ratio {} -> {}, support gcd {}, output in {}",
        spec.label(),
        opt(report.energy_ratio.before),
        opt(report.energy_ratio.after),
        report.support_gcd.map_or("-".into(), |g| g.to_string()),
        args.out.display()
    );
    Ok(())
}

fn lowest_significant_bin(magnitudes: &[f64]) -> Option<usize> {
    let peak = magnitudes.iter().skip(1).fold(0.0, |m: f64, &v| m.max(v));
    (peak > 0.0)
        .then(|| (1..magnitudes.len()).find(|&k| magnitudes[k] > SUPPORT_THRESHOLD * peak))
        .flatten()
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.6}"))
}

/// `bin,frequency_hz,magnitude_before,magnitude_after`.
fn spectrum_csv(before: &fundamental_core::Spectrum, after: &fundamental_core::Spectrum) -> String {
    let mut out = String::from("bin,frequency_hz,magnitude_before,magnitude_after\n");
    for (k, (b, a)) in before.bins.iter().zip(&after.bins).enumerate() {
        let _ = writeln!(
            out,
            "{k},{},{},{}",
            format_float(k as f64 * before.bin_width),
            format_float(b.norm()),
            format_float(a.norm())
        );
    }
    out
}
