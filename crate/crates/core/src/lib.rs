//! Karhunen-Loève expansion toolkit for spatially correlated fluid antenna
//! system (FAS) channels.
//!
//! The crate builds the Jakes correlation matrix of an `N`-port FAS, splits
//! it into independent eigenmodes, and evaluates outage probability and
//! ergodic capacity under the exact channel, its rank-`K` truncation, and
//! block-correlation baselines. Everything is linear scale: SNRs and
//! thresholds are plain ratios, never dB.
//!
//! Module map:
//!
//! * [`specfun`]: Bessel `J0` and the exponential integral `E1`.
//! * [`quadrature`]: Gauss-Hermite rules and tensor-product grid sums.
//! * [`spectral`]: correlation matrices, eigensystems, truncation metrics.
//! * [`channel`]: scenarios and seeded complex Gaussian channel samplers.
//! * [`outage`]: Monte Carlo, quadrature and closed-form outage evaluators.
//! * [`capacity`]: ergodic capacity by Monte Carlo and the rank-1 closed form.
//! * [`infotheory`]: entropy fractions, mutual information, rate-distortion.
//! * [`baselines`]: block-correlation (BCM/VBCM) surrogates.

pub mod baselines;
pub mod capacity;
pub mod channel;
mod error;
pub mod infotheory;
pub mod matrix;
pub mod outage;
pub mod quadrature;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::Matrix;

/// Converts a decibel value to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
