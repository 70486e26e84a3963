//! Scenarios and seeded samplers for correlated complex Gaussian channels.
//!
//! Every sampler draws `g/√η = A z` where `A` is an `N×K` real factor and `z`
//! holds `K` i.i.d. standard complex Gaussians. Trial `i` of a sampler with
//! seed `s` reads its modes from ChaCha8 stream `i` keyed by `s`, so the first
//! `K` modes of a trial are the same for every sampler sharing the seed. That
//! makes a truncated sampler and the exact sampler use common random numbers
//! and lets Monte Carlo loops be chunked across threads without changing a
//! single draw.

use std::f64::consts::TAU;
use std::ops::Range;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::matrix::Matrix;
use crate::spectral::{EigenSystem, KLTruncation};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;
/// Trials per parallel work unit. Reductions run over chunks in index order.
pub const CHUNK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Port count `N`.
    pub n: usize,
    /// Normalised aperture in wavelengths.
    pub w: f64,
    /// Mean channel power per port (linear).
    pub eta: f64,
    /// Average SNR `γ̄` (linear).
    pub avg_snr: f64,
    /// Outage threshold `γ_th` (linear).
    pub gamma_th: f64,
}

impl Scenario {
    pub fn new(n: usize, w: f64, eta: f64, avg_snr: f64, gamma_th: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("port count must be positive"));
        }
        for (name, v) in [("w", w), ("eta", eta), ("avg_snr", avg_snr), ("gamma_th", gamma_th)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Scenario { n, w, eta, avg_snr, gamma_th })
    }

    /// `x = γ_th / γ̄`, the threshold on the normalised port gain.
    pub fn normalized_threshold(&self) -> f64 {
        self.gamma_th / self.avg_snr
    }
}

/// Counter-addressed generator for the modes of one trial.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform on the open interval (0, 1).
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard complex Gaussian by Box-Muller; real and imaginary parts are
/// independent `N(0, 1/2)`.
pub(crate) fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1 = open_unit(rng);
    let u2 = open_unit(rng);
    let r = (-u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    Complex64::new(r * c, r * s)
}

/// Runs `f` over consecutive trial ranges of [`CHUNK_TRIALS`] in parallel and
/// returns the per-chunk results in chunk order.
pub(crate) fn chunked<T: Send>(trials: u64, f: impl Fn(Range<u64>) -> T + Sync) -> Vec<T> {
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK_TRIALS..((c + 1) * CHUNK_TRIALS).min(trials)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeededSampler {
    factor: Matrix,
    seed: u64,
    position: u64,
}

/// Exact sampler `A = U Λ^{1/2}`.
pub fn sampler_exact(eig: &EigenSystem, seed: u64) -> SeededSampler {
    let u = eig.vectors();
    let vals = eig.values();
    let factor = Matrix::from_fn(u.rows(), u.cols(), |i, k| u[(i, k)] * vals[k].sqrt());
    SeededSampler::from_factor(factor, seed)
}

/// Truncated sampler `A = U_K Λ_K^{1/2}`. The per-port power `η` never enters:
/// draws are normalised channels `g̃/√η`.
pub fn sampler_truncated(trunc: &KLTruncation, seed: u64) -> SeededSampler {
    let u = trunc.vectors();
    let vals = trunc.values();
    let factor = Matrix::from_fn(u.rows(), u.cols(), |i, k| u[(i, k)] * vals[k].sqrt());
    SeededSampler::from_factor(factor, seed)
}

impl SeededSampler {
    /// Sampler for covariance `A Aᵀ` given an `N×K` factor `A`.
    pub fn from_factor(factor: Matrix, seed: u64) -> Self {
        SeededSampler { factor, seed, position: 0 }
    }

    pub fn ports(&self) -> usize {
        self.factor.rows()
    }

    pub fn modes(&self) -> usize {
        self.factor.cols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    /// Index of the trial the next [`SeededSampler::next_draw`] returns.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Target covariance `A Aᵀ`.
    pub fn covariance(&self) -> Matrix {
        self.factor
            .matmul(&self.factor.transpose())
            .expect("factor shapes always agree")
    }

    /// Mode vector `z` of a given trial.
    pub fn modes_at(&self, trial: u64, z: &mut [Complex64]) {
        debug_assert_eq!(z.len(), self.modes());
        let mut rng = trial_rng(self.seed, trial);
        for zk in z.iter_mut() {
            *zk = complex_normal(&mut rng);
        }
    }

    /// `out = A z`.
    pub fn apply(&self, z: &[Complex64], out: &mut [Complex64]) {
        for (n, g) in out.iter_mut().enumerate() {
            *g = self
                .factor
                .row(n)
                .iter()
                .zip(z)
                .fold(Complex64::new(0.0, 0.0), |acc, (&a, &zk)| acc + zk * a);
        }
    }

    /// Normalised channel `g/√η` of a given trial.
    pub fn draw_at(&self, trial: u64) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); self.modes()];
        let mut g = vec![Complex64::new(0.0, 0.0); self.ports()];
        self.modes_at(trial, &mut z);
        self.apply(&z, &mut g);
        g
    }

    pub fn next_draw(&mut self) -> Vec<Complex64> {
        let g = self.draw_at(self.position);
        self.position += 1;
        g
    }

    /// `max_n |g_n|²/η` for trials `0..trials`, in trial order.
    pub fn max_gains(&self, trials: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(trials as usize);
        for part in chunked(trials, |range| {
            let mut z = vec![Complex64::new(0.0, 0.0); self.modes()];
            let mut g = vec![Complex64::new(0.0, 0.0); self.ports()];
            range
                .map(|t| {
                    self.modes_at(t, &mut z);
                    self.apply(&z, &mut g);
                    g.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
                })
                .collect::<Vec<_>>()
        }) {
            out.extend(part);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(20, 3.0, 1.0, 10.0, 1.0).is_ok());
        assert!(Scenario::new(0, 3.0, 1.0, 10.0, 1.0).is_err());
        assert!(Scenario::new(20, 3.0, -1.0, 10.0, 1.0).is_err());
        let s = Scenario::new(20, 3.0, 1.0, 4.0, 2.0).unwrap();
        assert_eq!(s.normalized_threshold(), 0.5);
    }

    #[test]
    fn same_seed_same_draws() {
        let f = Matrix::identity(3);
        let mut a = SeededSampler::from_factor(f.clone(), 7);
        let mut b = SeededSampler::from_factor(f, 7);
        for _ in 0..5 {
            assert_eq!(a.next_draw(), b.next_draw());
        }
        assert_eq!(a.position(), 5);
    }

    #[test]
    fn chunking_covers_all_trials_in_order() {
        let parts = chunked(10_000, |r| r.collect::<Vec<_>>());
        let flat: Vec<u64> = parts.into_iter().flatten().collect();
        assert_eq!(flat, (0..10_000).collect::<Vec<_>>());
    }

    #[test]
    fn box_muller_parts_have_half_variance() {
        let mut rng = trial_rng(1, 0);
        let n = 100_000;
        let (mut sr, mut si) = (0.0, 0.0);
        for _ in 0..n {
            let z = complex_normal(&mut rng);
            sr += z.re * z.re;
            si += z.im * z.im;
        }
        assert!((sr / n as f64 - 0.5).abs() < 0.005);
        assert!((si / n as f64 - 0.5).abs() < 0.005);
    }
}
