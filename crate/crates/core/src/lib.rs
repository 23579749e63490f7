//! Fundamental-component enhancement of periodic signals.
//!
//! A periodic signal whose spectrum misses its fundamental (the gcd of its
//! active frequencies) can get it back after a pointwise nonlinearity. This
//! crate provides the pieces to study that effect:
//!
//! * [`signal`]: exact trigonometric polynomials, sampling, sup-norm and
//!   global maxima of `|f|`, support gcd of a spectrum;
//! * [`activation`]: `|x|`, ReLU and the adaptive reciprocal
//!   `h_ε(x) = 1 / (1 − (1 − ε)|x|)`;
//! * [`spectral`]: DFT, fundamental energy ratio, spectrograms;
//! * [`theory`]: quadrature check of the `ε^{−1/2}` peak asymptotics of the
//!   activated fundamental, and sumset support analysis;
//! * [`experiments`]: the seeded Monte Carlo benchmark.

pub mod activation;
pub mod error;
pub mod experiments;
pub mod signal;
pub mod spectral;
pub mod theory;

pub use activation::{apply, h_eps, ActivationSpec};
pub use error::{Error, Result};
pub use signal::{sample, support_gcd, support_gcd_relative, Peak, PeakSet, SampledSignal, TrigPolynomial};
pub use spectral::{dft, fundamental_energy_ratio, Spectrogram, Spectrum};
