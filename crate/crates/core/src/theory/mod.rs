//! Numerical check of the peak asymptotics of the adaptive reciprocal
//! activation.
//!
//! For `f` with finitely many non-degenerate global maxima `t_j` of `g = |f|`,
//!
//! ```text
//! ∫_0^{2π} h_ε(|f(θ)| / ‖f‖_∞) e^{iθ} dθ
//!     = (π / √ε) Σ_j e^{i t_j} / √(−g''(t_j) / (2‖g‖_∞)) + O(ε^{−1/4}).
//! ```
//!
//! The left side is computed by peak-aware adaptive quadrature and compared
//! against the right side over a ladder of ε values. Integrals are taken in
//! the angle variable `θ = 2π t / P`, so polynomials of any period `P` are
//! handled the same way.

pub mod quadrature;
pub mod sumset;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::h_eps;
use crate::error::{Error, Result};
use crate::signal::{PeakSet, TrigPolynomial};

pub use quadrature::{integrate, integrate_real, integrate_to_infinity, QuadratureResult};
pub use sumset::{sumset_gcd_limit, sumset_support, FrequencySet, GcdLimit};

/// Largest admitted fitted exponent of the error growth in `1/ε`.
pub const SLOPE_LIMIT: f64 = 0.3;
/// Smallest ε accepted on a verification ladder.
pub const EPSILON_FLOOR: f64 = 1e-7;
/// Panel budget of the adaptive quadrature.
const MAX_PANELS: usize = 200_000;
/// Uniform seed panels over the period, in addition to the peak refinement.
const UNIFORM_PANELS: usize = 64;
/// A prediction this small relative to its summands counts as cancelled.
const CANCELLATION_TOLERANCE: f64 = 1e-9;
/// Integrals this small relative to `∫ h_ε` are quadrature noise.
const NOISE_FLOOR: f64 = 1e-8;

/// `∫_{|t|>C} dt / (A + B t²) = (π − 2 arctan(√(B/A) C)) / √(AB)`.
pub fn cauchy_tail_integral(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && c >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need A, B > 0 and C >= 0, got A = {a}, B = {b}, C = {c}"
        )));
    }
    Ok((PI - 2.0 * ((b / a).sqrt() * c).atan()) / (a * b).sqrt())
}

/// Result of one quadrature of the activated signal against `e^{ibθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivatedIntegral {
    pub value: Complex64,
    pub error_estimate: f64,
    /// `∫ h_ε`, the scale against which cancellation is judged.
    pub mass: f64,
}

fn peak_angles(peaks: &PeakSet) -> impl Iterator<Item = (f64, f64)> + '_ {
    let stretch = peaks.period / TAU;
    peaks.peaks.iter().map(move |p| {
        (
            p.location / stretch,
            p.second_derivative * stretch * stretch,
        )
    })
}

/// Seed breakpoints in `[0, 2π]`: uniform panels plus, around every peak,
/// panels of width `√ε/8` doubling outward to `ε^{1/4}`.
fn seed_breakpoints(peaks: &PeakSet, epsilon: f64) -> Vec<f64> {
    let mut points: Vec<f64> = (0..=UNIFORM_PANELS)
        .map(|i| TAU * i as f64 / UNIFORM_PANELS as f64)
        .collect();
    let inner = epsilon.sqrt() / 8.0;
    let outer = epsilon.powf(0.25).min(PI / 2.0);
    for (theta, _) in peak_angles(peaks) {
        points.push(theta.rem_euclid(TAU));
        let mut offset = inner;
        while offset < outer {
            points.push((theta + offset).rem_euclid(TAU));
            points.push((theta - offset).rem_euclid(TAU));
            offset *= 2.0;
        }
        points.push((theta + outer).rem_euclid(TAU));
        points.push((theta - outer).rem_euclid(TAU));
    }
    points.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        match out.last() {
            Some(&last) if p - last <= 1e-14 => {}
            _ => out.push(p),
        }
    }
    if let Some(last) = out.last_mut() {
        if TAU - *last <= 1e-14 {
            *last = TAU;
        } else {
            out.push(TAU);
        }
    }
    out
}

/// `∫_0^{2π} h_ε(|f(θ)| / ‖f‖_∞) e^{i·bin·θ} dθ` with `‖f‖_∞` taken from
/// `peaks`. `epsilon = 1` is accepted (the integrand is then `e^{i·bin·θ}`).
pub fn activated_integral(
    poly: &TrigPolynomial,
    peaks: &PeakSet,
    epsilon: f64,
    bin: u32,
) -> Result<ActivatedIntegral> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let norm = peaks.sup_norm;
    let stretch = poly.period() / TAU;
    let tol = 1e-6 / epsilon.sqrt();
    let breakpoints = seed_breakpoints(peaks, epsilon);
    let activated = |theta: f64| {
        let x = poly.evaluate(theta * stretch).norm() / norm;
        // |f| / ‖f‖ exceeds 1 only by rounding; h_eps clamps that
        h_eps(x.min(1.0 + 1e-10), epsilon).unwrap_or(1.0 / epsilon)
    };
    let k = bin as f64;
    let result = integrate(
        |theta| Complex64::cis(k * theta) * activated(theta),
        &breakpoints,
        tol,
        MAX_PANELS,
    )?;
    let mass = if bin == 0 {
        result.value.re
    } else {
        integrate(|theta| Complex64::new(activated(theta), 0.0), &breakpoints, tol, MAX_PANELS)?
            .value
            .re
    };
    Ok(ActivatedIntegral {
        value: result.value,
        error_estimate: result.error_estimate,
        mass,
    })
}

/// [`activated_integral`] after locating the peaks of `|f|`.
pub fn numeric_fundamental_integral(poly: &TrigPolynomial, epsilon: f64, target_bin: u32) -> Result<Complex64> {
    let peaks = poly.find_global_maxima()?;
    Ok(activated_integral(poly, &peaks, epsilon, target_bin)?.value)
}

/// `(π/√ε) Σ_j e^{i·bin·t_j} / √(−g''(t_j) / (2‖g‖_∞))`, with `t_j` and
/// `g''` expressed in the angle variable.
pub fn asymptotic_prediction_at(peaks: &PeakSet, epsilon: f64, bin: u32) -> Complex64 {
    prediction_terms(peaks, epsilon, bin).sum()
}

/// The leading term of the bin-1 integral.
pub fn asymptotic_prediction(peaks: &PeakSet, epsilon: f64) -> Complex64 {
    asymptotic_prediction_at(peaks, epsilon, 1)
}

fn prediction_terms(peaks: &PeakSet, epsilon: f64, bin: u32) -> impl Iterator<Item = Complex64> + '_ {
    let norm = peaks.sup_norm;
    let scale = PI / epsilon.sqrt();
    peak_angles(peaks).map(move |(theta, g2)| {
        Complex64::cis(bin as f64 * theta) * (scale / (-g2 / (2.0 * norm)).sqrt())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub epsilon: f64,
    pub numeric_integral: Complex64,
    pub prediction: Complex64,
    pub abs_error: f64,
    /// `abs_error / |prediction|`; absent when the prediction cancels.
    pub rel_error: Option<f64>,
    pub quadrature_error: f64,
    pub mass: f64,
}

impl AsymptoticReport {
    fn new(epsilon: f64, integral: ActivatedIntegral, prediction: Complex64, cancelled: bool) -> Self {
        let abs_error = (integral.value - prediction).norm();
        let rel_error = (!cancelled && prediction.norm() > 0.0).then(|| abs_error / prediction.norm());
        Self {
            epsilon,
            numeric_integral: integral.value,
            prediction,
            abs_error,
            rel_error,
            quadrature_error: integral.error_estimate,
            mass: integral.mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVerification {
    pub reports: Vec<AsymptoticReport>,
    /// The leading term vanishes: peaks cancel in `Σ e^{i t_j}/√(−g''(t_j))`.
    pub cancelled: bool,
    /// Least-squares slope of `log y` against `log(1/ε)`, where `y` is the
    /// absolute error, or `|integral|` when the leading term cancels.
    pub slope: f64,
    /// Every integral is at quadrature noise (exact cancellation by symmetry).
    pub vanishing: bool,
    pub criterion_met: bool,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Compares quadrature against the peak prediction over a decreasing ε
/// ladder and fits the growth exponent of the discrepancy.
pub fn scaling_verification(poly: &TrigPolynomial, epsilons: &[f64]) -> Result<ScalingVerification> {
    if epsilons.len() < 2 {
        return Err(Error::InvalidArgument("the ε ladder needs at least two values".into()));
    }
    if epsilons.iter().any(|&e| !(e >= EPSILON_FLOOR && e <= 0.1)) {
        return Err(Error::InvalidArgument(format!(
            "ε values must lie in [{EPSILON_FLOOR:e}, 0.1]"
        )));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("the ε ladder must be strictly decreasing".into()));
    }
    let peaks = poly.find_global_maxima()?;

    let magnitude: f64 = prediction_terms(&peaks, 1.0, 1).map(|c| c.norm()).sum();
    let cancelled = asymptotic_prediction(&peaks, 1.0).norm() <= CANCELLATION_TOLERANCE * magnitude;

    let integrals: Vec<ActivatedIntegral> = epsilons
        .par_iter()
        .map(|&eps| activated_integral(poly, &peaks, eps, 1))
        .collect::<Result<_>>()?;

    let reports: Vec<AsymptoticReport> = epsilons
        .iter()
        .zip(&integrals)
        .map(|(&eps, integral)| {
            let prediction = if cancelled {
                Complex64::default()
            } else {
                asymptotic_prediction(&peaks, eps)
            };
            AsymptoticReport::new(eps, *integral, prediction, cancelled)
        })
        .collect();

    let xs: Vec<f64> = epsilons.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = reports
        .iter()
        .map(|r| r.abs_error.max(f64::MIN_POSITIVE).ln())
        .collect();
    let slope = fit_slope(&xs, &ys);
    let vanishing = reports
        .iter()
        .all(|r| r.numeric_integral.norm() <= NOISE_FLOOR * r.mass);
    let criterion_met = slope <= SLOPE_LIMIT || (cancelled && vanishing);

    Ok(ScalingVerification {
        reports,
        cancelled,
        slope,
        vanishing,
        criterion_met,
    })
}

/// Bin-1 and bin-G integrals of the activated signal, `G` the gcd of the
/// frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcdReduction {
    pub gcd: u32,
    pub bin_one: Complex64,
    pub bin_gcd: Complex64,
}

pub fn gcd_reduction_check(poly: &TrigPolynomial, epsilon: f64) -> Result<GcdReduction> {
    let gcd = poly.frequency_gcd();
    if gcd <= 1 {
        return Err(Error::PreconditionViolation(format!(
            "frequency gcd must exceed 1, got {gcd}"
        )));
    }
    let peaks = poly.find_global_maxima()?;
    let bin_one = activated_integral(poly, &peaks, epsilon, 1)?.value;
    let bin_gcd = activated_integral(poly, &peaks, epsilon, gcd)?.value;
    Ok(GcdReduction {
        gcd,
        bin_one,
        bin_gcd,
    })
}
