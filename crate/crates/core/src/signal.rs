//! Trigonometric polynomials with integer frequencies, their samples, and the
//! analysis of `g = |f|`: sup-norm, global maxima, and frequency-support gcd.
//!
//! A polynomial is stored either in complex form,
//! `f(t) = Σ a_k exp(2πi m_k t / P)`, or in real cosine form, where the same
//! complex amplitudes encode `f(t) = Σ |a_k| cos(2π m_k t / P + arg a_k)`,
//! i.e. the real part of the complex sum.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid points per unit of the highest frequency used for bracketing.
const GRID_PER_FREQUENCY: usize = 64;
const MIN_GRID: usize = 4096;
/// Relative width of the merge window for coincident Newton roots.
const DEDUPE_TOLERANCE: f64 = 1e-6;
/// Relative slack admitted when filtering maxima down to the global ones.
const GLOBAL_TOLERANCE: f64 = 1e-9;
/// Absolute cutoff on |g''| below which a maximum is degenerate.
const DEGENERACY_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub frequency: u32,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    terms: Vec<Term>,
    period: f64,
    real_cosine_form: bool,
}

/// Values of `f`, `f'` and `f''` at a single point.
#[derive(Debug, Clone, Copy)]
struct Jet {
    f: Complex64,
    df: Complex64,
    d2f: Complex64,
}

impl Jet {
    /// `p = |f|²`.
    fn p(&self) -> f64 {
        self.f.norm_sqr()
    }

    fn dp(&self) -> f64 {
        2.0 * (self.df * self.f.conj()).re
    }

    fn d2p(&self) -> f64 {
        2.0 * (self.d2f * self.f.conj()).re + 2.0 * self.df.norm_sqr()
    }
}

impl TrigPolynomial {
    /// Complex exponential form. Repeated frequencies are summed and zero
    /// amplitudes dropped.
    pub fn complex<I>(terms: I, period: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, Complex64)>,
    {
        Self::build(terms, period, false)
    }

    /// Real cosine form: `(m, a)` stands for `|a| cos(2π m t / P + arg a)`.
    pub fn real_cosine<I>(terms: I, period: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, Complex64)>,
    {
        Self::build(terms, period, true)
    }

    fn build<I>(terms: I, period: f64, real_cosine_form: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, Complex64)>,
    {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let mut merged: BTreeMap<u32, Complex64> = BTreeMap::new();
        for (frequency, amplitude) in terms {
            if frequency == 0 {
                return Err(Error::InvalidArgument("frequencies must be >= 1".into()));
            }
            if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
                return Err(Error::InvalidArgument("amplitudes must be finite".into()));
            }
            *merged.entry(frequency).or_default() += amplitude;
        }
        let terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
            .map(|(frequency, amplitude)| Term { frequency, amplitude })
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidArgument("polynomial has no nonzero term".into()));
        }
        Ok(Self {
            terms,
            period,
            real_cosine_form,
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_real_cosine_form(&self) -> bool {
        self.real_cosine_form
    }

    pub fn frequencies(&self) -> Vec<u32> {
        self.terms.iter().map(|t| t.frequency).collect()
    }

    pub fn max_frequency(&self) -> u32 {
        self.terms.last().map(|t| t.frequency).unwrap_or(0)
    }

    /// gcd of the active frequencies.
    pub fn frequency_gcd(&self) -> u32 {
        self.terms.iter().fold(0, |g, t| g.gcd(&t.frequency))
    }

    /// Angular frequency of the fundamental, `2π / P`.
    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    /// Multiplies every amplitude by `c`.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        let terms = self.terms.iter().map(|t| (t.frequency, t.amplitude * c));
        Self::build(terms, self.period, self.real_cosine_form)
    }

    /// `t ↦ f(t − τ)`.
    pub fn shifted(&self, tau: f64) -> Self {
        let omega = self.omega();
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                frequency: t.frequency,
                amplitude: t.amplitude * Complex64::cis(-(t.frequency as f64) * omega * tau),
            })
            .collect();
        Self {
            terms,
            period: self.period,
            real_cosine_form: self.real_cosine_form,
        }
    }

    /// Same polynomial with the given frequency removed, if present.
    pub fn without_frequency(&self, frequency: u32) -> Option<Self> {
        let terms: Vec<Term> = self
            .terms
            .iter()
            .copied()
            .filter(|t| t.frequency != frequency)
            .collect();
        if terms.is_empty() {
            None
        } else {
            Some(Self {
                terms,
                period: self.period,
                real_cosine_form: self.real_cosine_form,
            })
        }
    }

    /// Two-sided exponential expansion `f(t) = Σ c_n exp(i n ω t)`.
    fn exponentials(&self) -> Vec<(f64, Complex64)> {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let m = t.frequency as f64;
            if self.real_cosine_form {
                out.push((m, t.amplitude * 0.5));
                out.push((-m, t.amplitude.conj() * 0.5));
            } else {
                out.push((m, t.amplitude));
            }
        }
        out
    }

    /// `f(t)`. For the real cosine form the imaginary part is zero.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let omega = self.omega();
        let sum: Complex64 = self
            .terms
            .iter()
            .map(|term| term.amplitude * Complex64::cis(term.frequency as f64 * omega * t))
            .sum();
        if self.real_cosine_form {
            Complex64::new(sum.re, 0.0)
        } else {
            sum
        }
    }

    fn jet(&self, expansion: &[(f64, Complex64)], t: f64) -> Jet {
        let omega = self.omega();
        let mut jet = Jet {
            f: Complex64::default(),
            df: Complex64::default(),
            d2f: Complex64::default(),
        };
        for &(n, c) in expansion {
            let w = n * omega;
            let v = c * Complex64::cis(w * t);
            jet.f += v;
            jet.df += v * Complex64::new(0.0, w);
            jet.d2f -= v * (w * w);
        }
        jet
    }

    /// Fourier coefficients of `p = |f|²` at nonzero lags.
    fn modulus_square_spectrum(&self) -> (f64, BTreeMap<i64, Complex64>) {
        let exps = self.exponentials();
        let mut lags: BTreeMap<i64, Complex64> = BTreeMap::new();
        let mut dc = 0.0;
        for &(n, c) in &exps {
            for &(n2, c2) in &exps {
                let lag = n as i64 - n2 as i64;
                let v = c * c2.conj();
                if lag == 0 {
                    dc += v.re;
                } else {
                    *lags.entry(lag).or_default() += v;
                }
            }
        }
        (dc, lags)
    }

    fn grid_size(&self) -> usize {
        MIN_GRID.max(GRID_PER_FREQUENCY * self.max_frequency() as usize)
    }

    /// `‖f‖_∞`, by a dense grid scan of `|f|²` and golden-section refinement
    /// of every grid maximum that could hide the true peak.
    pub fn sup_norm(&self) -> f64 {
        let exps = self.exponentials();
        let n = self.grid_size();
        let h = self.period / n as f64;
        let p: Vec<f64> = (0..n).map(|i| self.jet(&exps, i as f64 * h).p()).collect();
        let p_max = p.iter().cloned().fold(0.0, f64::max);
        // Band-limited p cannot rise more than ~2% of its max between grid points.
        let floor = 0.96 * p_max;
        let mut best = p_max;
        for i in 0..n {
            let prev = p[(i + n - 1) % n];
            let next = p[(i + 1) % n];
            if p[i] >= floor && p[i] >= prev && p[i] >= next {
                let t = i as f64 * h;
                let refined = golden_section_max(|s| self.jet(&exps, s).p(), t - h, t + h, 1e-12);
                best = best.max(refined);
            }
        }
        best.sqrt()
    }

    /// All global maximizers of `g = |f|` on one period with `g''` obtained
    /// analytically from `p = |f|²`.
    pub fn find_global_maxima(&self) -> Result<PeakSet> {
        let (dc, lags) = self.modulus_square_spectrum();
        let scale = dc.abs().max(f64::MIN_POSITIVE);
        if lags.values().all(|c| c.norm() <= 1e-14 * scale) {
            return Err(Error::ConstantModulus);
        }

        let exps = self.exponentials();
        let n = self.grid_size();
        let h = self.period / n as f64;
        let dp: Vec<f64> = (0..n).map(|i| self.jet(&exps, i as f64 * h).dp()).collect();

        let mut candidates: Vec<(f64, Jet)> = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            if dp[i] > 0.0 && dp[j] <= 0.0 {
                let a = i as f64 * h;
                let t = refine_derivative_root(|s| self.jet(&exps, s), a, a + h, dp[i], dp[j]);
                let t = t.rem_euclid(self.period);
                candidates.push((t, self.jet(&exps, t)));
            }
        }
        if candidates.is_empty() {
            return Err(Error::ConstantModulus);
        }

        let candidate_max = candidates
            .iter()
            .map(|(_, j)| j.p().sqrt())
            .fold(0.0, f64::max);
        let sup_norm = self.sup_norm().max(candidate_max);
        let threshold = sup_norm * (1.0 - GLOBAL_TOLERANCE);

        let mut global: Vec<(f64, Jet)> = candidates
            .into_iter()
            .filter(|(_, j)| j.p().sqrt() >= threshold)
            .collect();
        global.sort_by(|a, b| a.0.total_cmp(&b.0));

        let merge = DEDUPE_TOLERANCE * self.period;
        let mut deduped: Vec<(f64, Jet)> = Vec::with_capacity(global.len());
        for (t, jet) in global {
            match deduped.last() {
                Some(&(last, _)) if t - last < merge => {}
                _ => deduped.push((t, jet)),
            }
        }
        if deduped.len() > 1 {
            let first = deduped[0].0;
            let last = deduped[deduped.len() - 1].0;
            if first + self.period - last < merge {
                deduped.pop();
            }
        }

        let mut peaks = Vec::with_capacity(deduped.len());
        for (location, jet) in deduped {
            let value = jet.p().sqrt();
            let second_derivative = jet.d2p() / (2.0 * value);
            if second_derivative > -DEGENERACY_CUTOFF {
                return Err(Error::DegenerateMaximum {
                    location,
                    second_derivative,
                });
            }
            peaks.push(Peak {
                location,
                value,
                second_derivative,
            });
        }
        Ok(PeakSet {
            peaks,
            sup_norm,
            period: self.period,
        })
    }
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(0.5 * (a + b)))
}

/// Safeguarded Newton on `p'` inside a bracket where it goes from `+` to `−`.
fn refine_derivative_root<F: Fn(f64) -> Jet>(jet: F, a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    if fb == 0.0 {
        return b;
    }
    let (mut lo, mut hi) = (a, b);
    debug_assert!(fa > 0.0 && fb < 0.0);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let j = jet(t);
        let d = j.dp();
        if d == 0.0 {
            return t;
        }
        if d > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let d2 = j.d2p();
        let newton = t - d / d2;
        let next = if d2 != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - t).abs();
        t = next;
        if step <= 1e-15 * (1.0 + t.abs()) || hi - lo <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// `t_j ∈ [0, P)`.
    pub location: f64,
    /// `g(t_j)`.
    pub value: f64,
    /// `g''(t_j) < 0`.
    pub second_derivative: f64,
}

/// Global maxima of `g = |f|` over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    pub sup_norm: f64,
    pub period: f64,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_rate: f64,
    start_time: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64, start_time: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            start_time,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Same timing, new sample values.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate, self.start_time)
    }
}

/// Samples `Re f(n / rate)` for `n = 0..round(rate · duration)`.
pub fn sample(poly: &TrigPolynomial, sample_rate: f64, duration: f64) -> Result<SampledSignal> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be positive, got {duration}")));
    }
    let required = 2.0 * poly.max_frequency() as f64 / poly.period();
    if !(sample_rate > required) {
        return Err(Error::NyquistViolation {
            sample_rate,
            required,
        });
    }
    let n = (sample_rate * duration).round() as usize;
    let samples = (0..n)
        .map(|i| poly.evaluate(i as f64 / sample_rate).re)
        .collect();
    SampledSignal::new(samples, sample_rate, 0.0)
}

/// gcd of `{k ≥ 1 : |c_k| > threshold}` over one-sided spectrum bins.
pub fn support_gcd(coefficients: &[Complex64], threshold: f64) -> Result<u64> {
    coefficients
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.norm() > threshold)
        .map(|(k, _)| k as u64)
        .reduce(|g, k| g.gcd(&k))
        .ok_or(Error::EmptySupport)
}

/// [`support_gcd`] with the threshold given as a fraction of the largest
/// non-DC bin magnitude.
pub fn support_gcd_relative(coefficients: &[Complex64], relative: f64) -> Result<u64> {
    let peak = coefficients
        .iter()
        .skip(1)
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::EmptySupport);
    }
    support_gcd(coefficients, relative * peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    pub(crate) fn triad(period: f64) -> TrigPolynomial {
        TrigPolynomial::real_cosine([(6, c(0.8)), (9, c(1.4)), (33, c(0.9))], period).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let p = TrigPolynomial::complex([(1, c(1.0))], TAU).unwrap();
        assert_eq!(p.evaluate(0.0), c(1.0));

        assert_relative_eq!(triad(1.0).evaluate(0.0).re, 3.1, epsilon = 1e-14);

        let p = TrigPolynomial::complex([(1, c(1.0)), (2, c(1.0))], TAU).unwrap();
        assert!(p.evaluate(PI).norm() < 1e-15);
    }

    #[test]
    fn construction_normalizes_terms() {
        let p = TrigPolynomial::complex([(3, c(1.0)), (1, c(2.0)), (3, c(-1.0))], TAU).unwrap();
        assert_eq!(p.frequencies(), vec![1]);
        assert!(TrigPolynomial::complex([(2, c(0.0))], TAU).is_err());
        assert!(TrigPolynomial::complex([(0, c(1.0))], TAU).is_err());
        assert!(TrigPolynomial::complex([(1, c(1.0))], 0.0).is_err());
    }

    #[test]
    fn sample_examples() {
        let p = TrigPolynomial::real_cosine([(1, c(1.0))], 1.0).unwrap();
        let s = sample(&p, 512.0, 1.0).unwrap();
        assert_eq!(s.len(), 512);
        assert_eq!(s.samples()[0], 1.0);

        let s = sample(&p, 4.0, 1.0).unwrap();
        for (got, want) in s.samples().iter().zip([1.0, 0.0, -1.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_rejects_aliasing() {
        let p = TrigPolynomial::real_cosine([(3, c(1.0))], 1.0).unwrap();
        assert!(matches!(sample(&p, 6.0, 1.0), Err(Error::NyquistViolation { .. })));
        assert!(sample(&p, 6.5, 1.0).is_ok());
        assert!(sample(&p, 8.0, 0.0).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        let p = TrigPolynomial::complex([(1, c(1.0))], TAU).unwrap();
        assert_relative_eq!(p.sup_norm(), 1.0, max_relative = 1e-12);
        let p = TrigPolynomial::complex([(1, c(1.0)), (2, c(1.0))], TAU).unwrap();
        assert_relative_eq!(p.sup_norm(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn sup_norm_matches_fine_scan() {
        let p = triad(1.0);
        // Off-origin phases so the maximum is not on a grid point.
        let q = p.shifted(0.0123456);
        let n = 10_000_000usize;
        let scan = (0..n)
            .map(|i| q.evaluate(i as f64 / n as f64).norm())
            .fold(0.0, f64::max);
        assert_relative_eq!(q.sup_norm(), scan, max_relative = 1e-8);
        assert!(q.sup_norm() >= scan);
    }

    #[test]
    fn maxima_of_two_term_exponential() {
        let p = TrigPolynomial::complex([(1, c(1.0)), (2, c(1.0))], TAU).unwrap();
        let peaks = p.find_global_maxima().unwrap();
        assert_eq!(peaks.len(), 1);
        let peak = peaks.peaks[0];
        assert!(peak.location.min(TAU - peak.location) < 1e-9);
        assert_relative_eq!(peak.value, 2.0, max_relative = 1e-12);
        assert_relative_eq!(peak.second_derivative, -0.5, max_relative = 1e-9);

        // g(t) = 2|cos(t/2)|; central difference on a 1e-6 grid
        let h = 1e-4;
        let g = |t: f64| p.evaluate(t).norm();
        let fd = (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
        assert_relative_eq!(fd, -0.5, max_relative = 1e-6);
    }

    #[test]
    fn maxima_of_rectified_cosine() {
        let p = TrigPolynomial::real_cosine([(1, c(1.0))], TAU).unwrap();
        let peaks = p.find_global_maxima().unwrap();
        assert_eq!(peaks.len(), 2);
        let locs: Vec<f64> = peaks.peaks.iter().map(|p| p.location).collect();
        assert!(locs[0] < 1e-9 || (TAU - locs[0]) < 1e-9);
        assert!((locs[1] - PI).abs() < 1e-9);
        for peak in &peaks.peaks {
            assert_relative_eq!(peak.second_derivative, -1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn constant_modulus_is_rejected() {
        let p = TrigPolynomial::complex([(3, Complex64::new(0.3, -2.0))], TAU).unwrap();
        assert_eq!(p.find_global_maxima(), Err(Error::ConstantModulus));
    }

    #[test]
    fn triad_has_three_peaks() {
        let peaks = triad(TAU).find_global_maxima().unwrap();
        assert_eq!(peaks.len(), 3);
        for (k, peak) in peaks.peaks.iter().enumerate() {
            assert!((peak.location - k as f64 * TAU / 3.0).abs() < 1e-9);
            assert_relative_eq!(peak.value, 3.1, max_relative = 1e-12);
            // f > 0 at the peaks, so g'' = f'' = -Σ a m²
            let expected = -(0.8 * 36.0 + 1.4 * 81.0 + 0.9 * 1089.0);
            assert_relative_eq!(peak.second_derivative, expected, max_relative = 1e-8);
        }
    }

    #[test]
    fn degenerate_maximum_is_rejected() {
        // |f| = 1 + 0.4 cos t - 0.1 cos 2t, maximal at 0 with vanishing curvature
        let p = TrigPolynomial::complex(
            [(1, c(-0.05)), (2, c(0.2)), (3, c(1.0)), (4, c(0.2)), (5, c(-0.05))],
            TAU,
        )
        .unwrap();
        assert!(matches!(
            p.find_global_maxima(),
            Err(Error::DegenerateMaximum { .. })
        ));
    }

    #[test]
    fn support_gcd_examples() {
        let mut bins = vec![Complex64::default(); 40];
        for k in [6, 9, 33] {
            bins[k] = c(1.0);
        }
        assert_eq!(support_gcd(&bins, 0.5).unwrap(), 3);

        let mut bins = vec![Complex64::default(); 8];
        bins[5] = c(0.2);
        assert_eq!(support_gcd(&bins, 0.0).unwrap(), 5);

        bins[2] = c(1.0);
        bins[3] = c(1.0);
        bins[5] = c(0.0);
        assert_eq!(support_gcd(&bins, 0.0).unwrap(), 1);

        let mut dc_only = vec![Complex64::default(); 8];
        dc_only[0] = c(4.0);
        assert_eq!(support_gcd(&dc_only, 0.0), Err(Error::EmptySupport));
        assert_eq!(support_gcd_relative(&dc_only, 1e-6), Err(Error::EmptySupport));
    }
}
