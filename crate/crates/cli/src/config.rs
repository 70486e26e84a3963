//! Flag and config-file resolution. Flags override the JSON config, which
//! overrides the built-in defaults.

use std::path::PathBuf;

use clap::Args;
use fas_kl::channel::{Scenario, DEFAULT_SEED};
use fas_kl::outage::Method;
use fas_kl::quadrature::DEFAULT_ORDER;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_N: usize = 20;
pub const DEFAULT_W: f64 = 3.0;
pub const DEFAULT_BLOCKS: usize = 4;
pub const DEFAULT_GRID: &str = "-10:2:30";

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Number of ports.
    #[arg(long)]
    pub n: Option<usize>,
    /// Normalised aperture in wavelengths.
    #[arg(long)]
    pub w: Option<f64>,
    /// Mean channel power per port (linear).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Outage threshold in dB.
    #[arg(long = "gamma-th-db", allow_hyphen_values = true)]
    pub gamma_th_db: Option<f64>,
    /// Single average SNR in dB.
    #[arg(long = "snr-db", allow_hyphen_values = true, conflicts_with = "snr_grid_db")]
    pub snr_db: Option<f64>,
    /// SNR grid in dB: `start:step:stop` (inclusive) or a comma list.
    #[arg(long = "snr-grid-db", allow_hyphen_values = true)]
    pub snr_grid_db: Option<String>,
    /// Truncation order for `kl_mc` / `kl_gh` given without arguments.
    #[arg(long)]
    pub k: Option<usize>,
    /// Gauss-Hermite order per dimension.
    #[arg(long)]
    pub q: Option<usize>,
    /// Monte Carlo trials; scientific notation such as `1e5` is accepted.
    #[arg(long, value_parser = parse_trials)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated methods, e.g. `exact_mc,kl_mc(5),bcm(4),rank1`.
    #[arg(long)]
    pub method: Option<String>,
    /// Block count for `bcm` given without an argument.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Output file (or directory for `figure`). Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the above keys (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// On-disk form of a run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub w: Option<f64>,
    pub eta: Option<f64>,
    pub gamma_th_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub q: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub method: Option<Vec<String>>,
    pub blocks: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Fully resolved configuration, recorded verbatim in sidecars.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub w: f64,
    pub eta: f64,
    pub gamma_th_db: f64,
    pub snr_grid_db: Vec<f64>,
    pub k: Option<usize>,
    pub q: usize,
    pub trials: u64,
    pub seed: u64,
    #[serde(serialize_with = "serialize_methods")]
    pub methods: Vec<Method>,
    pub blocks: usize,
    pub out: Option<PathBuf>,
}

fn serialize_methods<S: serde::Serializer>(m: &[Method], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|m| m.to_string()))
}

impl RunConfig {
    /// Linear-domain scenario; `avg_snr` is a placeholder since sweeps carry
    /// their own SNR grid.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let gamma_th = fas_kl::db_to_linear(self.gamma_th_db);
        Ok(Scenario::new(self.n, self.w, self.eta, 1.0, gamma_th)?)
    }
}

fn parse_trials(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(format!("trials must be a positive integer, got {s:?}"));
    }
    Ok(v as u64)
}

/// Parses `start:step:stop` (inclusive of `stop` up to rounding) or a comma
/// list, which is sorted and deduplicated.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("malformed SNR grid {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            if count > 100_000 {
                return Err(CliError::Usage(format!("SNR grid {s:?} has too many points")));
            }
            Ok((0..=count).map(|i| a + i as f64 * step).collect())
        }
        [_] => {
            let mut v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            v.sort_by(f64::total_cmp);
            v.dedup();
            Ok(v)
        }
        _ => Err(bad()),
    }
}

/// Splits on commas that are not inside parentheses.
pub fn split_methods(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out.into_iter().map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

/// Bare `kl_mc`, `kl_gh` and `bcm` take their order from `--k`, `--q`, `--blocks`.
pub fn parse_method(token: &str, k: Option<usize>, q: usize, blocks: usize) -> Result<Method, CliError> {
    let need_k = || k.ok_or_else(|| CliError::Usage(format!("method {token} needs --k")));
    Ok(match token {
        "kl_mc" => Method::KlMc { k: need_k()? },
        "kl_gh" => Method::KlGh { k: need_k()?, q },
        "bcm" => Method::Bcm { d: blocks },
        other => other.parse()?,
    })
}

/// Per-subcommand defaults for the fields that vary between commands.
#[derive(Debug, Clone, Copy)]
pub struct Defaults<'a> {
    pub n: usize,
    pub methods: &'a [&'a str],
    pub trials: u64,
}

impl Default for Defaults<'_> {
    fn default() -> Self {
        Defaults { n: DEFAULT_N, methods: &["exact_mc"], trials: fas_kl::outage::DEFAULT_TRIALS }
    }
}

impl CommonArgs {
    /// Merges flags over the config file over `defaults`.
    pub fn resolve(&self, defaults: &Defaults) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let q = self.q.or(file.q).unwrap_or(DEFAULT_ORDER);
        let k = self.k.or(file.k);
        let blocks = self.blocks.or(file.blocks).unwrap_or(DEFAULT_BLOCKS);
        let snr_grid_db = match (self.snr_db, &self.snr_grid_db) {
            (Some(s), _) => vec![s],
            (None, Some(g)) => parse_grid(g)?,
            (None, None) => match (file.snr_db, file.snr_grid_db) {
                (Some(s), _) => vec![s],
                (None, Some(g)) => g,
                (None, None) => parse_grid(DEFAULT_GRID)?,
            },
        };
        let tokens: Vec<String> = match (&self.method, file.method) {
            (Some(m), _) => split_methods(m),
            (None, Some(m)) => m,
            (None, None) => defaults.methods.iter().map(|s| s.to_string()).collect(),
        };
        let methods = tokens
            .iter()
            .map(|t| parse_method(t, k, q, blocks))
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = RunConfig {
            n: self.n.or(file.n).unwrap_or(defaults.n),
            w: self.w.or(file.w).unwrap_or(DEFAULT_W),
            eta: self.eta.or(file.eta).unwrap_or(1.0),
            gamma_th_db: self.gamma_th_db.or(file.gamma_th_db).unwrap_or(0.0),
            snr_grid_db,
            k,
            q,
            trials: self.trials.or(file.trials).unwrap_or(defaults.trials),
            seed: self.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            methods,
            blocks,
            out: self.out.clone().or(file.out),
        };
        cfg.scenario()?;
        Ok(cfg)
    }
}
