//! Globally adaptive Gauss-Kronrod (7/15) quadrature over a set of seed
//! panels, for real- or complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += sum * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, starting from
/// one panel per consecutive breakpoint pair and bisecting the panel with
/// the largest error estimate until the total estimate is below `abs_tol`.
pub fn integrate<F>(f: F, breakpoints: &[f64], abs_tol: f64, max_panels: usize) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "quadrature breakpoints must be strictly increasing".into(),
        ));
    }
    let mut heap: BinaryHeap<Panel> = breakpoints
        .windows(2)
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();
    let mut total_error: f64 = heap.iter().map(|p| p.error).sum();

    while !(total_error <= abs_tol) {
        if heap.len() >= max_panels || !total_error.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                error_estimate: total_error,
                tolerance: abs_tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval at floating-point resolution
            return Err(Error::QuadratureNonConvergence {
                error_estimate: total_error,
                tolerance: abs_tol,
            });
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Sum in left-to-right order so the result does not depend on heap layout.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error_estimate = panels.iter().map(|p| p.error).sum();
    Ok(QuadratureResult {
        value,
        error_estimate,
        panels: panels.len(),
    })
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, breakpoints: &[f64], abs_tol: f64, max_panels: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate(|x| Complex64::new(f(x), 0.0), breakpoints, abs_tol, max_panels)?;
    Ok((r.value.re, r.error_estimate))
}

/// `∫_a^∞ f`, through `t = a + s / (1 − s)` on `s ∈ [0, 1)`.
pub fn integrate_to_infinity<F>(f: F, a: f64, abs_tol: f64, max_panels: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let g = |s: f64| {
        let u = 1.0 - s;
        f(a + s / u) / (u * u)
    };
    let breakpoints: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
    integrate_real(g, &breakpoints, abs_tol, max_panels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let (v, _) = integrate_real(|x| x.powi(20) - 3.0 * x, &[0.0, 1.0], 1e-14, 10).unwrap();
        assert!((v - (1.0 / 21.0 - 1.5)).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_complex() {
        let r = integrate(|t| Complex64::cis(5.0 * t), &[0.0, PI / 10.0], 1e-13, 100).unwrap();
        let exact = (Complex64::cis(PI / 2.0) - 1.0) / Complex64::new(0.0, 5.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn sharp_lorentzian() {
        let eps: f64 = 1e-8;
        let (v, _) = integrate_real(|t| 1.0 / (eps + t * t), &[-1.0, 0.0, 1.0], 1e-6, 10_000).unwrap();
        let exact = 2.0 * (1.0 / eps.sqrt()).atan() / eps.sqrt();
        assert!(((v - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite() {
        let (v, _) = integrate_to_infinity(|t| (-t).exp(), 0.0, 1e-12, 1000).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        let err = integrate_real(|t| 1.0 / t.sqrt(), &[0.0, 1.0], 1e-16, 8);
        assert!(matches!(err, Err(Error::QuadratureNonConvergence { .. })));
        let err = integrate_real(|_| f64::NAN, &[0.0, 1.0], 1.0, 8);
        assert!(matches!(err, Err(Error::QuadratureNonConvergence { .. })));
        assert!(integrate_real(|t| t, &[1.0, 1.0], 1e-3, 8).is_err());
    }
}
