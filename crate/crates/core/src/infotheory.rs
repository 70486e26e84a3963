//! Entropy fractions, mutual information and Gaussian rate-distortion by
//! reverse water-filling.
//!
//! Rates are in bits. Modes whose eigenvalue does not exceed
//! [`POSITIVITY_FLOOR`]`·λ₁` carry no finite differential entropy and are
//! left out of entropy sums.

use std::f64::consts::{E, PI};

use crate::spectral::EigenSystem;
use crate::{Error, Result};

/// Relative eigenvalue floor for entropy and mutual-information sums.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// `λ_K - λ_{K+1}` at or below this makes a KL operating point ill-defined.
pub const GAP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RDPoint {
    pub rate_bits: f64,
    /// Total distortion, in units of `η`.
    pub distortion: f64,
    /// `distortion / (η N)`.
    pub distortion_per_port: f64,
    pub theta: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("eta must be positive and finite, got {eta}")))
    }
}

/// Number of eigenvalues above the positivity floor.
pub fn positive_modes(eig: &EigenSystem) -> usize {
    let vals = eig.values();
    let floor = POSITIVITY_FLOOR * vals[0];
    vals.iter().take_while(|&&l| l > floor).count()
}

fn check_modes(eig: &EigenSystem, eta: f64, k: usize) -> Result<usize> {
    check_eta(eta)?;
    let n_pos = positive_modes(eig);
    if k == 0 || k > n_pos {
        return Err(Error::param(format!(
            "K = {k} must be in 1..={n_pos}, the modes above the floor {POSITIVITY_FLOOR}·λ₁"
        )));
    }
    Ok(n_pos)
}

/// Differential entropy (nats) of the leading `k` modes, `Σ ln(πe ηλ_k)`.
fn entropy_nats(vals: &[f64], eta: f64) -> f64 {
    vals.iter().map(|&l| (PI * E * eta * l).ln()).sum()
}

/// Fraction of the differential entropy of all positive modes held by the
/// leading `k`.
pub fn entropy_fraction(eig: &EigenSystem, eta: f64, k: usize) -> Result<f64> {
    let n_pos = check_modes(eig, eta, k)?;
    if k == n_pos {
        return Ok(1.0);
    }
    let vals = eig.values();
    Ok(entropy_nats(&vals[..k], eta) / entropy_nats(&vals[..n_pos], eta))
}

/// `Σ_{k≤K} log₂(πe ηλ_k)` bits.
pub fn mutual_information(eig: &EigenSystem, eta: f64, k: usize) -> Result<f64> {
    check_modes(eig, eta, k)?;
    Ok(eig.values()[..k]
        .iter()
        .map(|&l| (PI * E * eta * l).log2())
        .sum())
}

/// Reverse water-filling at water level `theta`.
fn water_fill(eigenvalues: &[f64], eta: f64, theta: f64) -> RDPoint {
    let mut rate = 0.0;
    let mut distortion = 0.0;
    for &l in eigenvalues {
        let v = eta * l;
        if v > theta {
            rate += (v / theta).log2();
        }
        distortion += v.min(theta);
    }
    RDPoint {
        rate_bits: rate,
        distortion,
        distortion_per_port: distortion / (eta * eigenvalues.len() as f64),
        theta,
    }
}

/// Points `R = Σ max(0, log₂(ηλ_k/θ))`, `D = Σ min(ηλ_k, θ)` for each `θ`.
/// Accepts any spectrum, so block-model surrogates can be compared directly.
pub fn rd_curve(eigenvalues: &[f64], eta: f64, theta_grid: &[f64]) -> Result<Vec<RDPoint>> {
    check_eta(eta)?;
    if eigenvalues.is_empty() {
        return Err(Error::param("rate-distortion needs at least one eigenvalue"));
    }
    theta_grid
        .iter()
        .map(|&theta| {
            if theta > 0.0 && theta.is_finite() {
                Ok(water_fill(eigenvalues, eta, theta))
            } else {
                Err(Error::param(format!("water level must be positive, got {theta}")))
            }
        })
        .collect()
}

/// Rate needed at total distortion `distortion`, by bisection on the water
/// level. Zero once `distortion` reaches the total power.
pub fn rd_rate_at(eigenvalues: &[f64], eta: f64, distortion: f64) -> Result<f64> {
    check_eta(eta)?;
    let total: f64 = eigenvalues.iter().map(|&l| eta * l.max(0.0)).sum();
    if !(distortion > 0.0) {
        return Err(Error::param(format!("distortion must be positive, got {distortion}")));
    }
    if distortion >= total {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, eta * eigenvalues.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if water_fill(eigenvalues, eta, mid).distortion > distortion {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(water_fill(eigenvalues, eta, lo.max(f64::MIN_POSITIVE)).rate_bits)
}

/// Operating point of rank-`k` KL truncation: `θ = ηλ_{K+1}`,
/// `R = Σ_{k≤K} log₂(λ_k/λ_{K+1})`, `D = η Σ_{k>K} λ_k`.
pub fn kl_rd_point(eig: &EigenSystem, eta: f64, k: usize) -> Result<RDPoint> {
    check_eta(eta)?;
    let vals = eig.values();
    let n = vals.len();
    if k == 0 || k >= n {
        return Err(Error::param(format!("K = {k} must be in 1..{n}")));
    }
    let next = vals[k];
    if vals[k - 1] - next <= GAP_TOLERANCE {
        return Err(Error::numerical(format!(
            "λ_{k} and λ_{} coincide; the operating point is not defined",
            k + 1
        )));
    }
    if !(next > 0.0) {
        return Err(Error::numerical(format!("λ_{} is zero; the water level must be positive", k + 1)));
    }
    let rate = vals[..k].iter().map(|&l| (l / next).log2()).sum();
    let tail: f64 = vals[k..].iter().sum();
    Ok(RDPoint {
        rate_bits: rate,
        distortion: eta * tail,
        distortion_per_port: tail / n as f64,
        theta: eta * next,
    })
}
