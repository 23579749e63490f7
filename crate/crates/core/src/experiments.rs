//! Monte Carlo benchmark of fundamental-component enhancement on random
//! periodic signals whose fundamental bin is empty, plus helpers for
//! before/after comparisons on user signals.
//!
//! Every trial draws from its own ChaCha8 stream (`seed_from_u64(master)`,
//! stream = trial index), so results do not depend on scheduling.

use std::f64::consts::TAU;
use std::ops::Range;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::{apply, ActivationSpec};
use crate::error::{Error, Result};
use crate::signal::{sample, SampledSignal, TrigPolynomial};
use crate::spectral::{dft, fundamental_energy_ratio, remove_bins};

pub const RNG_ID: &str = "rand_chacha::ChaCha8Rng seed_from_u64(master_seed), set_stream(trial_index)";
const MAX_RESAMPLES: usize = 10_000;
/// Histogram over log10(ratio): edges at -8, -7.75, ..., 0.
const HIST_LOG_MIN: f64 = -8.0;
const HIST_BINS: usize = 32;
/// Energy ratios at or below this are treated as exactly zero.
pub const ZERO_RATIO: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub sample_rate: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub freq_min: u32,
    pub freq_max: u32,
    pub density_scale: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub activations: Vec<ActivationSpec>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sample_rate: 512.0,
            k_min: 5,
            k_max: 100,
            freq_min: 2,
            freq_max: 250,
            density_scale: 100.0,
            trials: 10_000,
            master_seed: 0,
            activations: default_activations(),
        }
    }
}

/// Abs, ReLU and h_ε for ε ∈ {0.2, 0.1, 0.05}.
pub fn default_activations() -> Vec<ActivationSpec> {
    vec![
        ActivationSpec::Abs,
        ActivationSpec::Relu,
        ActivationSpec::AdaptiveReciprocal { epsilon: 0.2 },
        ActivationSpec::AdaptiveReciprocal { epsilon: 0.1 },
        ActivationSpec::AdaptiveReciprocal { epsilon: 0.05 },
    ]
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad(format!("need 1 <= k_min <= k_max, got {}..{}", self.k_min, self.k_max));
        }
        if self.freq_min < 2 || self.freq_min > self.freq_max {
            return bad(format!(
                "need 2 <= freq_min <= freq_max, got {}..{}",
                self.freq_min, self.freq_max
            ));
        }
        if self.k_max > (self.freq_max - self.freq_min + 1) as usize {
            return bad("k_max exceeds the number of available frequencies".into());
        }
        if !(self.density_scale > 0.0) {
            return bad("density scale must be positive".into());
        }
        if !(self.sample_rate > 2.0 * self.freq_max as f64) {
            return bad(format!(
                "sample rate {} Hz is at or below the Nyquist rate of frequency {}",
                self.sample_rate, self.freq_max
            ));
        }
        if self.activations.is_empty() {
            return bad("at least one activation is required".into());
        }
        Ok(())
    }

    fn weights(&self) -> Vec<(u32, f64)> {
        (self.freq_min..=self.freq_max)
            .map(|l| (l, (-(l as f64 / self.density_scale).powi(2)).exp()))
            .collect()
    }

    /// `count` distinct frequencies from `freq_min..=freq_max`, each draw
    /// proportional to `exp(−(l / density_scale)²)` over the values left.
    pub fn draw_frequencies<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<u32> {
        draw_without_replacement(rng, &self.weights(), count)
    }

    /// Fresh RNG for trial `index`.
    pub fn trial_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }
}

/// Draws `count` distinct frequencies, each draw proportional to the weights
/// of the values still available.
fn draw_without_replacement<R: Rng>(rng: &mut R, weights: &[(u32, f64)], count: usize) -> Vec<u32> {
    let mut pool = weights.to_vec();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let total: f64 = pool.iter().map(|(_, w)| w).sum();
        let mut u = rng.gen::<f64>() * total;
        let mut pick = pool.len() - 1;
        for (i, (_, w)) in pool.iter().enumerate() {
            if u < *w {
                pick = i;
                break;
            }
            u -= w;
        }
        chosen.push(pool.swap_remove(pick).0);
    }
    chosen.sort_unstable();
    chosen
}

/// One random signal `Σ a_k cos(2π j_k t + φ_k)` of period 1 with
/// `gcd(j_k) = 1`, `a_k ∈ (0, 1]` and `φ_k ∈ (0, 2π]`.
pub fn generate_synthetic<R: Rng>(config: &SynthConfig, rng: &mut R) -> Result<TrigPolynomial> {
    let weights = config.weights();
    let k = rng.gen_range(config.k_min..=config.k_max);
    let frequencies = (0..MAX_RESAMPLES)
        .map(|_| draw_without_replacement(rng, &weights, k))
        .find(|f| f.iter().fold(0u32, |g, &m| g.gcd(&m)) == 1)
        .ok_or(Error::RejectionOverflow(MAX_RESAMPLES))?;
    let terms: Vec<(u32, Complex64)> = frequencies
        .into_iter()
        .map(|j| {
            let amplitude = 1.0 - rng.gen::<f64>();
            let phase = TAU * (1.0 - rng.gen::<f64>());
            (j, Complex64::from_polar(amplitude, phase))
        })
        .collect();
    TrigPolynomial::real_cosine(terms, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Fixed log10 bins; out-of-range values land in the end bins.
    pub fn log_ratio(values: &[f64]) -> Self {
        let width = -HIST_LOG_MIN / HIST_BINS as f64;
        let edges = (0..=HIST_BINS)
            .map(|i| 10f64.powf(HIST_LOG_MIN + i as f64 * width))
            .collect();
        let mut counts = vec![0u64; HIST_BINS];
        for &v in values {
            let bin = if v > 0.0 {
                ((v.log10() - HIST_LOG_MIN) / width).floor().clamp(0.0, (HIST_BINS - 1) as f64) as usize
            } else {
                0
            };
            counts[bin] += 1;
        }
        Self { edges, counts }
    }

    pub fn merged(&self, other: &Histogram) -> Result<Self> {
        if self.edges != other.edges {
            return Err(Error::InvalidArgument("histograms have different edges".into()));
        }
        Ok(Self {
            edges: self.edges.clone(),
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
        })
    }
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Median and median absolute deviation (unscaled).
pub fn median_and_mad(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = median_of_sorted(&sorted);
    let mut deviations: Vec<f64> = values.iter().map(|v| (v - median).abs()).collect();
    deviations.sort_by(f64::total_cmp);
    (median, median_of_sorted(&deviations))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub activation: ActivationSpec,
    pub median: f64,
    pub mad: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
    pub trials_run: usize,
}

impl TrialStats {
    fn from_ratios(activation: ActivationSpec, ratios: &[f64]) -> Self {
        let (median, mad) = median_and_mad(ratios);
        Self {
            activation,
            median,
            mad,
            min: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
            max: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            histogram: Histogram::log_ratio(ratios),
            trials_run: ratios.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub rng: String,
    pub config: SynthConfig,
    pub stats: Vec<TrialStats>,
}

/// Energy ratios of every activation for trial `index`.
pub fn run_trial(config: &SynthConfig, index: u64) -> Result<Vec<f64>> {
    let mut rng = config.trial_rng(index);
    let poly = generate_synthetic(config, &mut rng)?;
    let signal = sample(&poly, config.sample_rate, poly.period())?;
    let max_bin = (signal.len() / 2).min(256);
    config
        .activations
        .iter()
        .map(|&spec| {
            let activated = apply(spec, &signal, None)?;
            fundamental_energy_ratio(&dft(&activated), 1, max_bin)
        })
        .collect()
}

/// Per-activation energy ratios of trials `range`, in trial order.
pub fn trial_ratios(config: &SynthConfig, range: Range<u64>) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let rows: Vec<Vec<f64>> = range
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<Result<_>>()?;
    let columns = (0..config.activations.len())
        .map(|a| rows.iter().map(|row| row[a]).collect())
        .collect();
    Ok(columns)
}

pub fn run_trials(config: &SynthConfig) -> Result<BenchmarkResult> {
    run_trial_range(config, 0..config.trials as u64)
}

/// Statistics over a sub-range of trial indices; disjoint ranges give
/// histograms that add up to the full run.
pub fn run_trial_range(config: &SynthConfig, range: Range<u64>) -> Result<BenchmarkResult> {
    if range.is_empty() {
        return Err(Error::InvalidArgument("empty trial range".into()));
    }
    let columns = trial_ratios(config, range)?;
    let stats = config
        .activations
        .iter()
        .zip(&columns)
        .map(|(&spec, ratios)| TrialStats::from_ratios(spec, ratios))
        .collect();
    Ok(BenchmarkResult {
        rng: RNG_ID.to_string(),
        config: config.clone(),
        stats,
    })
}

/// Drops the frequency-1 term. `None` if nothing else remains.
pub fn remove_fundamental(poly: &TrigPolynomial) -> Option<TrigPolynomial> {
    poly.without_frequency(1)
}

/// Zeroes DFT bins ±1 of a one-period recording.
pub fn remove_fundamental_sampled(signal: &SampledSignal) -> Result<SampledSignal> {
    remove_bins(signal, &[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnhancementCategory {
    /// `r_after > r_before`, i.e. `log r_after / log r_before < 1`.
    Enhanced,
    NotEnhanced,
    /// No fundamental before, some after.
    EnhancedFromZero,
    /// No fundamental before or after.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhancementPair {
    pub r_before: f64,
    pub r_after: f64,
    pub category: EnhancementCategory,
}

impl EnhancementPair {
    /// `log r_after / log r_before`, undefined when `r_before` is zero or one.
    pub fn log_ratio(&self) -> Option<f64> {
        (self.r_before > ZERO_RATIO && self.r_before < 1.0 && self.r_after > 0.0)
            .then(|| self.r_after.ln() / self.r_before.ln())
    }
}

/// Fundamental energy ratio of a one-period signal before and after `spec`.
pub fn enhancement_ratio_pair(signal: &SampledSignal, spec: ActivationSpec) -> Result<EnhancementPair> {
    if signal.samples().iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroSignal);
    }
    let max_bin = (signal.len() / 2).min(256);
    let r_before = fundamental_energy_ratio(&dft(signal), 1, max_bin)?;
    let activated = apply(spec, signal, None)?;
    let r_after = fundamental_energy_ratio(&dft(&activated), 1, max_bin)?;
    let category = if r_before <= ZERO_RATIO {
        if r_after > ZERO_RATIO {
            EnhancementCategory::EnhancedFromZero
        } else {
            EnhancementCategory::Absent
        }
    } else if r_after > r_before {
        EnhancementCategory::Enhanced
    } else {
        EnhancementCategory::NotEnhanced
    };
    Ok(EnhancementPair {
        r_before,
        r_after,
        category,
    })
}
