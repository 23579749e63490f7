//! Pointwise activations: rectification, ReLU and the adaptive reciprocal
//! `h_ε(x) = 1 / (1 − (1 − ε)|x|)` applied to the sup-norm-normalized signal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Arguments this far above 1 in modulus are clamped rather than rejected.
const OVERSHOOT_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActivationSpec {
    Abs,
    Relu,
    AdaptiveReciprocal { epsilon: f64 },
}

impl ActivationSpec {
    pub fn adaptive(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        Ok(Self::AdaptiveReciprocal { epsilon })
    }

    /// Short identifier such as `abs`, `relu` or `heps0.1`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ActivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Abs => f.write_str("abs"),
            Self::Relu => f.write_str("relu"),
            Self::AdaptiveReciprocal { epsilon } => write!(f, "heps{epsilon}"),
        }
    }
}

impl FromStr for ActivationSpec {
    type Err = Error;

    /// Accepts `abs`, `relu`, `heps` (ε = 0.1), `heps:<ε>` and `heps<ε>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "abs" => Ok(Self::Abs),
            "relu" => Ok(Self::Relu),
            "heps" => Self::adaptive(0.1),
            other => {
                let eps = other
                    .strip_prefix("heps")
                    .map(|rest| rest.trim_start_matches([':', '=']))
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown activation '{other}'")))?;
                let eps: f64 = eps
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad epsilon in '{other}'")))?;
                Self::adaptive(eps)
            }
        }
    }
}

/// `1 / (1 − (1 − ε)|x|)` for `|x| ≤ 1`.
pub fn h_eps(x: f64, epsilon: f64) -> Result<f64> {
    let mut r = x.abs();
    if !(r <= 1.0) {
        if r <= 1.0 + OVERSHOOT_CLAMP {
            r = 1.0;
        } else {
            return Err(Error::DomainError(x));
        }
    }
    Ok(1.0 / (1.0 - (1.0 - epsilon) * r))
}

/// Applies `spec` sample by sample. For the adaptive reciprocal, `norm`
/// defaults to `max |x_n|`.
pub fn apply(spec: ActivationSpec, signal: &SampledSignal, norm: Option<f64>) -> Result<SampledSignal> {
    let x = signal.samples();
    let out: Vec<f64> = match spec {
        ActivationSpec::Abs => x.iter().map(|v| v.abs()).collect(),
        ActivationSpec::Relu => x.iter().map(|v| v.max(0.0)).collect(),
        ActivationSpec::AdaptiveReciprocal { epsilon } => {
            let norm = norm.unwrap_or_else(|| x.iter().fold(0.0, |m, v| m.max(v.abs())));
            if norm == 0.0 {
                return Err(Error::ZeroSignal);
            }
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::InvalidArgument(format!("norm must be positive, got {norm}")));
            }
            x.iter()
                .map(|v| h_eps(v / norm, epsilon))
                .collect::<Result<_>>()?
        }
    };
    signal.with_samples(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn signal(v: &[f64]) -> SampledSignal {
        SampledSignal::new(v.to_vec(), 10.0, 0.5).unwrap()
    }

    #[test]
    fn h_eps_examples() {
        assert_eq!(h_eps(0.0, 0.1).unwrap(), 1.0);
        assert!((h_eps(1.0, 0.1).unwrap() - 10.0).abs() < 1e-12);
        assert!((h_eps(-1.0, 0.05).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn h_eps_domain() {
        assert!((h_eps(1.0 + 5e-10, 0.1).unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(h_eps(1.01, 0.1), Err(Error::DomainError(1.01)));
        assert!(h_eps(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn apply_examples() {
        let s = signal(&[1.0, -2.0, 3.0]);
        assert_eq!(apply(ActivationSpec::Abs, &s, None).unwrap().samples(), &[1.0, 2.0, 3.0]);
        assert_eq!(apply(ActivationSpec::Relu, &s, None).unwrap().samples(), &[1.0, 0.0, 3.0]);

        let s = signal(&[2.0, 0.0, -2.0]);
        let out = apply(ActivationSpec::adaptive(0.5).unwrap(), &s, Some(2.0)).unwrap();
        for (got, want) in out.samples().iter().zip([2.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(out.sample_rate(), 10.0);
        assert_eq!(out.start_time(), 0.5);
    }

    #[test]
    fn adaptive_on_zero_signal() {
        let s = signal(&[0.0, 0.0]);
        let spec = ActivationSpec::adaptive(0.1).unwrap();
        assert_eq!(apply(spec, &s, None), Err(Error::ZeroSignal));
        assert_eq!(apply(spec, &s, Some(0.0)), Err(Error::ZeroSignal));
    }

    #[test]
    fn parse_specs() {
        assert_eq!("abs".parse::<ActivationSpec>().unwrap(), ActivationSpec::Abs);
        assert_eq!("ReLU".parse::<ActivationSpec>().unwrap(), ActivationSpec::Relu);
        assert_eq!(
            "heps:0.05".parse::<ActivationSpec>().unwrap(),
            ActivationSpec::AdaptiveReciprocal { epsilon: 0.05 }
        );
        assert_eq!(
            "heps".parse::<ActivationSpec>().unwrap(),
            ActivationSpec::AdaptiveReciprocal { epsilon: 0.1 }
        );
        assert!("heps:1.5".parse::<ActivationSpec>().is_err());
        assert!("tanh".parse::<ActivationSpec>().is_err());
        let spec = ActivationSpec::adaptive(0.2).unwrap();
        assert_eq!(spec.label().parse::<ActivationSpec>().unwrap(), spec);
    }

    proptest! {
        #[test]
        fn h_eps_is_even_and_bounded(x in -1.0f64..=1.0, eps in 1e-6f64..0.999) {
            let h = h_eps(x, eps).unwrap();
            prop_assert_eq!(h, h_eps(-x, eps).unwrap());
            prop_assert!(h >= 1.0);
            prop_assert!(h <= (1.0 / eps) * (1.0 + 1e-12));
        }

        #[test]
        fn h_eps_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0, e1 in 1e-4f64..0.99, e2 in 1e-4f64..0.99) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(h_eps(lo, e1).unwrap() <= h_eps(hi, e1).unwrap());
            let (small, large) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(h_eps(a, large).unwrap() <= h_eps(a, small).unwrap());
        }

        #[test]
        fn geometric_series_converges(x in -0.9f64..=0.9, terms in 1usize..60) {
            // h at ε → 0 is 1/(1-|x|) = Σ |x|^j
            let r = x.abs();
            let limit = 1.0 / (1.0 - r);
            let partial: f64 = (0..=terms).map(|j| r.powi(j as i32)).sum();
            let bound = r.powi(terms as i32 + 1) / (1.0 - r);
            prop_assert!((limit - partial).abs() <= bound * (1.0 + 1e-9) + 1e-12);
            let tiny = h_eps(x, 1e-15).unwrap();
            prop_assert!((tiny - limit).abs() <= 1e-12 * limit);
        }

        #[test]
        fn apply_preserves_layout(v in proptest::collection::vec(-5.0f64..5.0, 2..64), rate in 1.0f64..1e4, start in -10.0f64..10.0) {
            let s = SampledSignal::new(v.clone(), rate, start).unwrap();
            for spec in [ActivationSpec::Abs, ActivationSpec::Relu, ActivationSpec::AdaptiveReciprocal { epsilon: 0.1 }] {
                if let Ok(out) = apply(spec, &s, None) {
                    prop_assert_eq!(out.len(), s.len());
                    prop_assert_eq!(out.sample_rate(), rate);
                    prop_assert_eq!(out.start_time(), start);
                }
            }
        }
    }
}
