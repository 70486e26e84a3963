//! Outage probability `P(max_n |g_n|²/η ≤ x)` under the exact channel, its
//! KL truncations, and the block-correlation baselines.
//!
//! The outage region is closed: a gain exactly equal to the threshold counts
//! as an outage.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::baselines::{bcm_partition, block_sampler, vbcm_partition};
use crate::channel::{sampler_exact, sampler_truncated, Scenario, SeededSampler};
use crate::quadrature::{gauss_hermite, tensor_grid_reduce_par, CompensatedSum};
use crate::spectral::{eigendecompose, jakes_matrix, KLTruncation};
use crate::{db_to_linear, Error, Result};

pub const MIN_TRIALS: u64 = 1_000;
pub const DEFAULT_TRIALS: u64 = 100_000;
/// Largest truncation order the quadrature evaluator accepts (grid of `Q^{2K}`).
pub const MAX_GH_MODES: usize = 3;
pub const MAX_GH_ORDER: usize = 32;
/// `|u_{n,2}|²` below this turns a disk constraint into a direct check on `z1`.
pub const DISK_FLOOR: f64 = 1e-12;

/// Monte Carlo result with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl Estimate {
    /// Binomial proportion `hits/trials` with standard error `√(p(1-p)/n)`.
    pub fn proportion(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Estimate {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    /// Sample mean with standard error from the sample standard deviation.
    pub fn from_samples(samples: impl IntoIterator<Item = f64>) -> Self {
        let mut sum = CompensatedSum::default();
        let mut sq = CompensatedSum::default();
        let mut n = 0u64;
        for s in samples {
            sum.add(s);
            sq.add(s * s);
            n += 1;
        }
        let nf = n as f64;
        let mean = sum.value() / nf;
        let var = if n > 1 {
            ((sq.value() - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            std_error: (var / nf).sqrt(),
            trials: n,
        }
    }

    /// `√(σ₁² + σ₂²)`, the standard error of a difference of independent estimates.
    pub fn combined_sigma(&self, other: &Estimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

fn check_threshold(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::param(format!("threshold must be positive, got {x}")))
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::param(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

/// Empirical outage fraction over `trials` draws of `sampler`.
pub fn outage_mc(sampler: &SeededSampler, x: f64, trials: u64) -> Result<Estimate> {
    Ok(outage_mc_many(sampler, &[x], trials)?.remove(0))
}

/// Outage estimates at several thresholds from one shared set of draws.
pub fn outage_mc_many(sampler: &SeededSampler, xs: &[f64], trials: u64) -> Result<Vec<Estimate>> {
    check_trials(trials)?;
    xs.iter().try_for_each(|&x| check_threshold(x))?;
    let gains = sampler.max_gains(trials);
    Ok(xs
        .iter()
        .map(|&x| Estimate::proportion(gains.iter().filter(|&&g| g <= x).count() as u64, trials))
        .collect())
}

/// Rank-1 closed form `1 - exp(-x/(λ₁c₁))`.
pub fn outage_rank1(trunc: &KLTruncation, x: f64) -> Result<f64> {
    check_threshold(x)?;
    let gain = trunc.values()[0] * trunc.c1();
    if !(gain > 0.0) {
        return Err(Error::numerical(format!("effective rank-1 gain λ₁c₁ = {gain} is not positive")));
    }
    Ok(-(-x / gain).exp_m1())
}

/// Integrand used by the Gauss-Hermite outage evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GhIntegrand {
    /// Outage indicator `Ψ(t; x)` itself.
    Indicator,
    /// `Ψ` averaged along the ray through each node. With `z = r ω` and the
    /// outage set star-shaped about the origin, the ray stays in outage for
    /// `r² ≤ x/max_n|(Aω)_n|²`, and `r²` is Gamma(K, 1) independently of `ω`:
    /// the node value becomes `P(K, x|z|²/max_n|(Az)_n|²)`. The integral is
    /// unchanged but the integrand is continuous away from the origin.
    #[default]
    RadialConditional,
}

/// `P(K, y)`, regularised lower incomplete gamma for integer `K`.
fn gamma_p_int(k: usize, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y.is_infinite() {
        return 1.0;
    }
    // Q(K, y) = e^{-y} Σ_{j<K} y^j / j!
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= y / j as f64;
        sum += term;
    }
    let q = (-y).exp() * sum;
    if k == 1 {
        -(-y).exp_m1()
    } else {
        (1.0 - q).clamp(0.0, 1.0)
    }
}

/// Truncated-KL outage CDF by `2K`-dimensional Gauss-Hermite quadrature with
/// the default (radially conditioned) integrand.
pub fn cdf_kl_gh(trunc: &KLTruncation, x: f64, q: usize) -> Result<f64> {
    cdf_kl_gh_with(trunc, x, q, GhIntegrand::default())
}

pub fn cdf_kl_gh_with(trunc: &KLTruncation, x: f64, q: usize, integrand: GhIntegrand) -> Result<f64> {
    check_threshold(x)?;
    let k = trunc.k();
    if k > MAX_GH_MODES {
        return Err(Error::param(format!(
            "quadrature over K = {k} modes needs {:.3e} grid points times {} ports; \
             use cdf_kl_mc for K > {MAX_GH_MODES}",
            (q as f64).powi(2 * k as i32),
            trunc.n()
        )));
    }
    if q == 0 || q > MAX_GH_ORDER {
        return Err(Error::param(format!("quadrature order must be in 1..={MAX_GH_ORDER}, got {q}")));
    }
    let rule = gauss_hermite(q)?;
    let factor = mode_factor(trunc);
    let n = trunc.n();
    let max_gain = |t: &[f64]| -> f64 {
        (0..n)
            .map(|p| {
                let row = &factor[p * k..(p + 1) * k];
                let (mut re, mut im) = (0.0, 0.0);
                for (m, a) in row.iter().enumerate() {
                    re += a * t[2 * m];
                    im += a * t[2 * m + 1];
                }
                re * re + im * im
            })
            .fold(0.0, f64::max)
    };
    let value = match integrand {
        GhIntegrand::Indicator => {
            let sum = tensor_grid_reduce_par(&rule, 2 * k, |t| {
                if max_gain(t) <= x {
                    1.0
                } else {
                    0.0
                }
            })?;
            sum / PI.powi(k as i32)
        }
        GhIntegrand::RadialConditional => {
            // An odd rule puts a node at the origin, where the ray direction is
            // undefined; it is dropped and the remaining weights renormalised.
            let numerator = tensor_grid_reduce_par(&rule, 2 * k, |t| {
                let r2: f64 = t.iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    return 0.0;
                }
                let m = max_gain(t);
                if m == 0.0 {
                    1.0
                } else {
                    gamma_p_int(k, x * r2 / m)
                }
            })?;
            let mass = tensor_grid_reduce_par(&rule, 2 * k, |t| {
                if t.iter().all(|&v| v == 0.0) {
                    0.0
                } else {
                    1.0
                }
            })?;
            numerator / mass
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Row-major `N×K` entries of `U_K Λ_K^{1/2}`.
fn mode_factor(trunc: &KLTruncation) -> Vec<f64> {
    let u = trunc.vectors();
    let vals = trunc.values();
    (0..trunc.n())
        .flat_map(|p| (0..trunc.k()).map(move |m| u[(p, m)] * vals[m].sqrt()))
        .collect()
}

/// Truncated-KL outage CDF by Monte Carlo over the retained modes.
pub fn cdf_kl_mc(trunc: &KLTruncation, x: f64, trials: u64, seed: u64) -> Result<Estimate> {
    outage_mc(&sampler_truncated(trunc, seed), x, trials)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub port: usize,
    pub center: Complex64,
    pub radius: f64,
}

/// Port whose second-mode coefficient is (numerically) zero, so its outage
/// condition `|√λ₁ u_{n,1} z₁|² ≤ x` does not involve `z₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConstraint {
    pub port: usize,
    pub gain: f64,
    pub satisfied: bool,
}

/// Rank-2 outage region in the `z₂` plane for a fixed `z₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskSet {
    pub disks: Vec<Disk>,
    pub linear: Vec<LinearConstraint>,
}

impl DiskSet {
    /// Whether `z2` lies in every disk and all direct constraints hold.
    pub fn contains(&self, z2: Complex64) -> bool {
        self.linear.iter().all(|c| c.satisfied)
            && self
                .disks
                .iter()
                .all(|d| (z2 - d.center).norm_sqr() <= d.radius * d.radius)
    }

    /// `P(z₂ ∈ ∩ disks)` for `z₂ ~ CN(0,1)`, integrated in polar coordinates
    /// over `rays` equally spaced directions. The intersection is convex, so
    /// each ray meets it in one interval `[ρ₁, ρ₂]` of mass `e^{-ρ₁²} - e^{-ρ₂²}`.
    pub fn gaussian_mass(&self, rays: usize) -> f64 {
        if rays == 0 || !self.linear.iter().all(|c| c.satisfied) {
            return 0.0;
        }
        let mut acc = CompensatedSum::default();
        for i in 0..rays {
            let phi = (i as f64 + 0.5) * 2.0 * PI / rays as f64;
            let dir = Complex64::from_polar(1.0, phi);
            let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
            for d in &self.disks {
                let beta = (d.center.conj() * dir).re;
                let disc = beta * beta - (d.center.norm_sqr() - d.radius * d.radius);
                if disc < 0.0 {
                    hi = -1.0;
                    break;
                }
                let s = disc.sqrt();
                lo = lo.max(beta - s);
                hi = hi.min(beta + s);
            }
            if hi > lo {
                acc.add((-lo * lo).exp() - (-hi * hi).exp());
            }
        }
        acc.value() / rays as f64
    }
}

/// Disks `|z₂ - c_n(z₁)| ≤ r_n` whose intersection is the rank-2 outage event
/// given `z₁`, with `c_n = -√λ₁ u_{n,1} z₁ / (√λ₂ u_{n,2})` and
/// `r_n = √(x/(λ₂|u_{n,2}|²))`.
pub fn rank2_disks(trunc: &KLTruncation, z1: Complex64, x: f64) -> Result<DiskSet> {
    check_threshold(x)?;
    if trunc.k() < 2 {
        return Err(Error::param("rank-2 disks need a truncation with K >= 2"));
    }
    let (l1, l2) = (trunc.values()[0], trunc.values()[1]);
    let u = trunc.vectors();
    let mut set = DiskSet { disks: Vec::new(), linear: Vec::new() };
    for port in 0..trunc.n() {
        let a = z1 * (l1.sqrt() * u[(port, 0)]);
        let u2 = u[(port, 1)];
        if u2 * u2 >= DISK_FLOOR && l2 > 0.0 {
            let b = l2.sqrt() * u2;
            set.disks.push(Disk {
                port,
                center: -a / b,
                radius: (x / (l2 * u2 * u2)).sqrt(),
            });
        } else {
            let gain = a.norm_sqr();
            set.linear.push(LinearConstraint { port, gain, satisfied: gain <= x });
        }
    }
    Ok(set)
}

/// Evaluator selection for [`outage_curve`] and the capacity sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactMc,
    KlMc { k: usize },
    KlGh { k: usize, q: usize },
    Rank1,
    Bcm { d: usize },
    Vbcm,
    Iid,
    Single,
}

impl Method {
    /// Whether results carry Monte Carlo noise.
    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Method::ExactMc | Method::KlMc { .. } | Method::Bcm { .. } | Method::Vbcm)
    }

    /// Sampler for Monte Carlo methods on the given scenario.
    pub fn sampler(&self, scenario: &Scenario, seed: u64) -> Result<SeededSampler> {
        let r = jakes_matrix(scenario.n, scenario.w)?;
        match *self {
            Method::ExactMc => Ok(sampler_exact(&eigendecompose(&r)?, seed)),
            Method::KlMc { k } => Ok(sampler_truncated(&eigendecompose(&r)?.truncate(k)?, seed)),
            Method::Bcm { d } => block_sampler(&bcm_partition(scenario.n, d, &r)?, seed),
            Method::Vbcm => block_sampler(&vbcm_partition(&r), seed),
            Method::Iid => Ok(SeededSampler::from_factor(crate::Matrix::identity(scenario.n), seed)),
            Method::Single => Ok(SeededSampler::from_factor(crate::Matrix::identity(1), seed)),
            other => Err(Error::param(format!("{other} has no sampler"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::ExactMc => write!(f, "exact_mc"),
            Method::KlMc { k } => write!(f, "kl_mc({k})"),
            Method::KlGh { k, q } => write!(f, "kl_gh({k},{q})"),
            Method::Rank1 => write!(f, "rank1"),
            Method::Bcm { d } => write!(f, "bcm({d})"),
            Method::Vbcm => write!(f, "vbcm"),
            Method::Iid => write!(f, "iid"),
            Method::Single => write!(f, "single"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form, e.g. `kl_mc(5)` or `kl_gh(2,10)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], Some(&s[open + 1..s.len() - 1])),
            Some(_) => return Err(Error::param(format!("malformed method {s:?}"))),
            None => (s, None),
        };
        let nums = args
            .map(|a| {
                a.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::param(format!("bad argument {v:?} in method {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?
            .unwrap_or_default();
        let method = match (name, nums.as_slice()) {
            ("exact_mc", []) => Method::ExactMc,
            ("kl_mc", [k]) => Method::KlMc { k: *k },
            ("kl_gh", [k]) => Method::KlGh { k: *k, q: crate::quadrature::DEFAULT_ORDER },
            ("kl_gh", [k, q]) => Method::KlGh { k: *k, q: *q },
            ("rank1", []) => Method::Rank1,
            ("bcm", [d]) => Method::Bcm { d: *d },
            ("vbcm", []) => Method::Vbcm,
            ("iid", []) => Method::Iid,
            ("single", []) => Method::Single,
            _ => return Err(Error::param(format!("unknown method {s:?}"))),
        };
        Ok(method)
    }
}

/// One point of an SNR sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub value: f64,
    /// Zero for deterministic evaluators.
    pub std_error: f64,
}

pub(crate) fn check_grid(grid_db: &[f64]) -> Result<()> {
    if grid_db.is_empty() {
        return Err(Error::param("SNR grid is empty"));
    }
    if grid_db.iter().any(|v| !v.is_finite()) || grid_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("SNR grid must be finite and strictly ascending"));
    }
    Ok(())
}

/// Outage probability over an SNR grid (dB). The scenario's own `avg_snr` is
/// ignored; each point uses `x = γ_th / 10^{snr/10}`. Monte Carlo methods
/// share one set of draws across the grid.
pub fn outage_curve(
    scenario: &Scenario,
    method: Method,
    snr_grid_db: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    check_grid(snr_grid_db)?;
    let xs: Vec<f64> = snr_grid_db
        .iter()
        .map(|&s| scenario.gamma_th / db_to_linear(s))
        .collect();
    let values: Vec<(f64, f64)> = match method {
        Method::ExactMc | Method::KlMc { .. } | Method::Bcm { .. } | Method::Vbcm => {
            let sampler = method.sampler(scenario, seed)?;
            outage_mc_many(&sampler, &xs, trials)?
                .into_iter()
                .map(|e| (e.value, e.std_error))
                .collect()
        }
        Method::KlGh { k, q } => {
            let trunc = eigendecompose(&jakes_matrix(scenario.n, scenario.w)?)?.truncate(k)?;
            xs.iter()
                .map(|&x| cdf_kl_gh(&trunc, x, q).map(|v| (v, 0.0)))
                .collect::<Result<_>>()?
        }
        Method::Rank1 => {
            let trunc = eigendecompose(&jakes_matrix(scenario.n, scenario.w)?)?.truncate(1)?;
            xs.iter()
                .map(|&x| outage_rank1(&trunc, x).map(|v| (v, 0.0)))
                .collect::<Result<_>>()?
        }
        Method::Iid => xs
            .iter()
            .map(|&x| ((-(-x).exp_m1()).powi(scenario.n as i32), 0.0))
            .collect(),
        Method::Single => xs.iter().map(|&x| (-(-x).exp_m1(), 0.0)).collect(),
    };
    Ok(snr_grid_db
        .iter()
        .zip(values)
        .map(|(&snr_db, (value, std_error))| CurvePoint { snr_db, value, std_error })
        .collect())
}
