//! Ergodic capacity `E[log₂(1 + γ̄ max_n |g_n|²/η)]`.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::channel::{chunked, Scenario, SeededSampler};
use crate::outage::{check_grid, CurvePoint, Estimate, Method, MIN_TRIALS};
use crate::quadrature::CompensatedSum;
use crate::specfun::exp_scaled_e1;
use crate::spectral::{eigendecompose, jakes_matrix, KLTruncation};
use crate::{db_to_linear, Error, Result};

pub const DEFAULT_TRIALS: u64 = 200_000;
/// Below this `μ` the `e^{1/μ}E₁(1/μ)` product uses its asymptotic series.
const SMALL_MU: f64 = 1e-3;

fn check_snr(avg_snr: f64) -> Result<()> {
    if avg_snr > 0.0 && avg_snr.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("average SNR must be positive and finite, got {avg_snr}")))
    }
}

/// Monte Carlo capacity over `trials` draws of `sampler`.
pub fn capacity_mc(sampler: &SeededSampler, avg_snr: f64, trials: u64) -> Result<Estimate> {
    Ok(capacity_mc_many(sampler, &[avg_snr], trials)?.remove(0))
}

/// Capacity estimates at several SNRs from one shared set of draws.
pub fn capacity_mc_many(sampler: &SeededSampler, snrs: &[f64], trials: u64) -> Result<Vec<Estimate>> {
    if trials < MIN_TRIALS {
        return Err(Error::param(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    snrs.iter().try_for_each(|&s| check_snr(s))?;
    // Per-chunk (sum, sum of squares) for every SNR, merged in chunk order.
    let parts = chunked(trials, |range| {
        let mut z = vec![Complex64::new(0.0, 0.0); sampler.modes()];
        let mut g = vec![Complex64::new(0.0, 0.0); sampler.ports()];
        let mut acc = vec![(CompensatedSum::default(), CompensatedSum::default()); snrs.len()];
        for t in range {
            sampler.modes_at(t, &mut z);
            sampler.apply(&z, &mut g);
            let m = g.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
            for (a, &s) in acc.iter_mut().zip(snrs) {
                let c = (s * m).ln_1p() / LN_2;
                a.0.add(c);
                a.1.add(c * c);
            }
        }
        acc
    });
    let n = trials as f64;
    Ok((0..snrs.len())
        .map(|i| {
            let (mut s, mut sq) = (CompensatedSum::default(), CompensatedSum::default());
            for p in &parts {
                s.add(p[i].0.value());
                sq.add(p[i].1.value());
            }
            let mean = s.value() / n;
            let var = ((sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
            Estimate { value: mean, std_error: (var / n).sqrt(), trials }
        })
        .collect())
}

/// Rank-1 closed form `e^{1/μ}E₁(1/μ)/ln 2` with `μ = γ̄λ₁c₁`.
pub fn capacity_rank1(trunc: &KLTruncation, avg_snr: f64) -> Result<f64> {
    check_snr(avg_snr)?;
    let mu = avg_snr * trunc.values()[0] * trunc.c1();
    rank1_capacity_from_mu(mu)
}

/// `e^{1/μ}E₁(1/μ)/ln 2`, the capacity of Rayleigh fading with mean SNR `μ`.
pub fn rank1_capacity_from_mu(mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::numerical(format!("rank-1 SNR μ = {mu} is not positive")));
    }
    let scaled = if mu < SMALL_MU {
        mu - mu * mu + 2.0 * mu * mu * mu
    } else {
        exp_scaled_e1(1.0 / mu)?
    };
    Ok(scaled / LN_2)
}

/// Capacity over an SNR grid (dB). Monte Carlo methods share one set of draws.
pub fn capacity_curve(
    scenario: &Scenario,
    method: Method,
    snr_grid_db: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    check_grid(snr_grid_db)?;
    let snrs: Vec<f64> = snr_grid_db.iter().map(|&d| db_to_linear(d)).collect();
    let values: Vec<(f64, f64)> = match method {
        Method::Rank1 => {
            let trunc = eigendecompose(&jakes_matrix(scenario.n, scenario.w)?)?.truncate(1)?;
            snrs.iter()
                .map(|&s| capacity_rank1(&trunc, s).map(|v| (v, 0.0)))
                .collect::<Result<_>>()?
        }
        Method::Single => snrs
            .iter()
            .map(|&s| rank1_capacity_from_mu(s).map(|v| (v, 0.0)))
            .collect::<Result<_>>()?,
        Method::KlGh { .. } => {
            return Err(Error::param("capacity has no quadrature evaluator; use kl_mc"));
        }
        _ => {
            let sampler = method.sampler(scenario, seed)?;
            capacity_mc_many(&sampler, &snrs, trials)?
                .into_iter()
                .map(|e| (e.value, e.std_error))
                .collect()
        }
    };
    Ok(snr_grid_db
        .iter()
        .zip(values)
        .map(|(&snr_db, (value, std_error))| CurvePoint { snr_db, value, std_error })
        .collect())
}
