//! Signal, curve and polynomial file formats.
//!
//! Signal CSV: first line `sample_rate,<Hz>`, then one sample per line.
//! Written files use [`format_float`] for every number and `\n` line ends,
//! so reading and re-writing a written file reproduces it byte for byte.

use std::fs;
use std::path::Path;

use fundamental_core::spectral::format_float;
use fundamental_core::{SampledSignal, TrigPolynomial};
use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::failure::{CliResult, Failure};

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// WAV when the file starts with a RIFF/WAVE header, CSV otherwise.
pub fn parse_signal(bytes: &[u8]) -> CliResult<SampledSignal> {
    if bytes.len() >= 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WAVE" {
        parse_wav(bytes)
    } else {
        parse_csv(bytes)
    }
}

pub fn parse_csv(bytes: &[u8]) -> CliResult<SampledSignal> {
    let text = std::str::from_utf8(bytes).map_err(|_| Failure::input("CSV input is not UTF-8 text"))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Failure::input("CSV input is empty"))?;
    let rate = header
        .trim()
        .strip_prefix("sample_rate,")
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|r| r.is_finite() && *r > 0.0)
        .ok_or_else(|| Failure::input("line 1: expected header 'sample_rate,<positive number>'"))?;
    let mut samples = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Failure::input(format!("line {}: malformed sample '{line}'", i + 1)))?;
        samples.push(v);
    }
    if samples.len() < 2 {
        return Err(Failure::input(format!("need at least 2 samples, found {}", samples.len())));
    }
    Ok(SampledSignal::new(samples, rate, 0.0)?)
}

/// First channel, integers scaled by `2^(bits−1)` into `[−1, 1]`.
pub fn parse_wav(bytes: &[u8]) -> CliResult<SampledSignal> {
    let reader = hound::WavReader::new(bytes).map_err(|e| Failure::input(format!("bad WAV file: {e}")))?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let bad = |e: hound::Error| Failure::input(format!("bad WAV data: {e}"));
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(bad)?
        }
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(bad)?,
        (format, bits) => {
            return Err(Failure::input(format!(
                "unsupported WAV encoding: {bits}-bit {format:?} (need 16/24/32-bit PCM)"
            )))
        }
    };
    let samples: Vec<f64> = interleaved.into_iter().step_by(channels).collect();
    if samples.len() < 2 {
        return Err(Failure::input("WAV file holds fewer than 2 frames"));
    }
    Ok(SampledSignal::new(samples, spec.sample_rate as f64, 0.0)?)
}

pub fn signal_csv(signal: &SampledSignal) -> String {
    let mut out = format!("sample_rate,{}\n", format_float(signal.sample_rate()));
    for &v in signal.samples() {
        out.push_str(&format_float(v));
        out.push('\n');
    }
    out
}

/// One frequency in Hz per line; blank lines are skipped.
pub fn parse_curve(bytes: &[u8]) -> CliResult<Vec<f64>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Failure::input("IF curve is not UTF-8 text"))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::input(format!("IF curve line {}: malformed value '{}'", i + 1, l.trim())))
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSpec {
    m: u32,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    re: Option<f64>,
    #[serde(default)]
    im: Option<f64>,
}

#[derive(Deserialize, Default, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case")]
enum Form {
    #[default]
    Complex,
    RealCosine,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolySpec {
    #[serde(default)]
    form: Form,
    #[serde(default)]
    period: Option<f64>,
    terms: Vec<TermSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PolyFile {
    Terms(Vec<TermSpec>),
    Full(PolySpec),
}

/// Either a bare term list `[{"m": 1, "re": 1, "im": 0}, …]` (complex
/// exponentials, period 2π) or `{"form": "complex" | "real_cosine",
/// "period": P, "terms": [...]}`. A term may give `"a"` for a real amplitude
/// instead of `"re"`/`"im"`.
pub fn parse_polynomial(bytes: &[u8]) -> CliResult<TrigPolynomial> {
    let file: PolyFile = serde_json::from_slice(bytes)
        .map_err(|e| Failure::input(format!("bad polynomial spec: {e}")))?;
    let spec = match file {
        PolyFile::Terms(terms) => PolySpec {
            form: Form::Complex,
            period: None,
            terms,
        },
        PolyFile::Full(spec) => spec,
    };
    let mut terms = Vec::with_capacity(spec.terms.len());
    for (i, t) in spec.terms.iter().enumerate() {
        let amplitude = match (t.a, t.re, t.im) {
            (Some(a), None, None) => Complex64::new(a, 0.0),
            (None, re, im) => Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
            _ => {
                return Err(Failure::input(format!(
                    "term {i}: give either \"a\" or \"re\"/\"im\", not both"
                )))
            }
        };
        terms.push((t.m, amplitude));
    }
    let period = spec.period.unwrap_or(std::f64::consts::TAU);
    let poly = match spec.form {
        Form::Complex => TrigPolynomial::complex(terms, period),
        Form::RealCosine => TrigPolynomial::real_cosine(terms, period),
    };
    poly.map_err(|e| Failure::input(format!("bad polynomial spec: {e}")))
}
