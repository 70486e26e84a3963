use std::io::Write;

use fas_kl::baselines::{bcm_partition, block_covariance, frobenius_rel_error, vbcm_partition};
use fas_kl::capacity::capacity_curve;
use fas_kl::infotheory::{entropy_fraction, kl_rd_point};
use fas_kl::outage::{outage_curve, CurvePoint, Method};
use fas_kl::spectral::{dof_rule, eigendecompose, jakes_matrix, EigenSystem};
use fas_kl::Matrix;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{fmt_g, fmt_opt, write_sidecar, Table};
use crate::CliError;

pub const CURVE_COLUMNS_OUTAGE: [&str; 7] = ["snr_db", "method", "k", "q", "trials", "p_out", "std_error"];
pub const CURVE_COLUMNS_CAPACITY: [&str; 7] = ["snr_db", "method", "k", "q", "trials", "capacity", "std_error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Outage,
    Capacity,
}

impl Metric {
    fn columns(self) -> &'static [&'static str] {
        match self {
            Metric::Outage => &CURVE_COLUMNS_OUTAGE,
            Metric::Capacity => &CURVE_COLUMNS_CAPACITY,
        }
    }
}

pub fn jakes_eig(n: usize, w: f64) -> Result<EigenSystem, CliError> {
    Ok(eigendecompose(&jakes_matrix(n, w)?)?)
}

/// Retained mode count as reported in the `k` column.
fn method_k(m: Method, n: usize) -> Option<usize> {
    match m {
        Method::ExactMc => Some(n),
        Method::KlMc { k } | Method::KlGh { k, .. } => Some(k),
        Method::Rank1 => Some(1),
        _ => None,
    }
}

pub fn eig_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let eig = jakes_eig(cfg.n, cfg.w)?;
    let mut t = Table::new(&["k", "lambda", "power_frac", "entropy_frac"]);
    for k in 1..=cfg.n {
        let power = eig.truncate(k)?.power_fraction();
        // Undefined once the retained modes include numerically null ones.
        let entropy = entropy_fraction(&eig, cfg.eta, k).map(fmt_g).unwrap_or_default();
        t.push(vec![k.to_string(), fmt_g(eig.values()[k - 1]), fmt_g(power), entropy]);
    }
    Ok(t)
}

pub fn curve(cfg: &RunConfig, method: Method, metric: Metric) -> Result<Vec<CurvePoint>, CliError> {
    let s = cfg.scenario()?;
    Ok(match metric {
        Metric::Outage => outage_curve(&s, method, &cfg.snr_grid_db, cfg.trials, cfg.seed)?,
        Metric::Capacity => capacity_curve(&s, method, &cfg.snr_grid_db, cfg.trials, cfg.seed)?,
    })
}

/// One table over several methods, rows sorted by (method, snr).
pub fn curve_table(cfg: &RunConfig, methods: &[Method], metric: Metric) -> Result<Table, CliError> {
    let mut rows = Vec::new();
    for &m in methods {
        for p in curve(cfg, m, metric)? {
            rows.push((m.to_string(), p, m));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.snr_db.total_cmp(&b.1.snr_db)));
    let mut t = Table::new(metric.columns());
    for (name, p, m) in rows {
        let q = match m {
            Method::KlGh { q, .. } => Some(q),
            _ => None,
        };
        let trials = if m.is_monte_carlo() { cfg.trials.to_string() } else { String::new() };
        t.push(vec![
            fmt_g(p.snr_db),
            name,
            fmt_opt(method_k(m, cfg.n)),
            fmt_opt(q),
            trials,
            fmt_g(p.value),
            fmt_g(p.std_error),
        ]);
    }
    Ok(t)
}

/// KL operating points for `K = 1..=kmax`; `kmax` is `--k` or the aperture
/// rule, capped below `N`.
pub fn rd_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let eig = jakes_eig(cfg.n, cfg.w)?;
    let kmax = cfg.k.unwrap_or_else(|| dof_rule(cfg.w) + 2).min(cfg.n.saturating_sub(1)).max(1);
    let mut t = Table::new(&["k", "theta", "rate_bits", "distortion", "distortion_per_port", "epsilon"]);
    for k in 1..=kmax {
        let p = kl_rd_point(&eig, cfg.eta, k)?;
        let eps = eig.truncate(k)?.epsilon();
        t.push(vec![
            k.to_string(),
            fmt_g(p.theta),
            fmt_g(p.rate_bits),
            fmt_g(p.distortion),
            fmt_g(p.distortion_per_port),
            fmt_g(eps),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bias {
    /// Outage above exact: a conservative model.
    Conservative,
    /// Outage below exact: an optimistic model.
    Optimistic,
    Unbiased,
    Mixed,
}

impl Bias {
    pub fn as_str(self) -> &'static str {
        match self {
            Bias::Conservative => "overestimates",
            Bias::Optimistic => "underestimates",
            Bias::Unbiased => "within_noise",
            Bias::Mixed => "mixed",
        }
    }
}

/// Classifies `approx - exact` over points with exact outage above `floor`,
/// counting only gaps beyond three combined standard errors.
pub fn bias_direction(approx: &[CurvePoint], exact: &[CurvePoint], floor: f64) -> (Bias, f64) {
    let (mut over, mut under, mut worst) = (false, false, 0.0f64);
    for (a, e) in approx.iter().zip(exact) {
        if e.value <= floor {
            continue;
        }
        let d = a.value - e.value;
        if d.abs() > worst.abs() {
            worst = d;
        }
        if d.abs() > 3.0 * a.std_error.hypot(e.std_error) {
            if d > 0.0 {
                over = true;
            } else {
                under = true;
            }
        }
    }
    let bias = match (over, under) {
        (true, false) => Bias::Conservative,
        (false, true) => Bias::Optimistic,
        (false, false) => Bias::Unbiased,
        (true, true) => Bias::Mixed,
    };
    (bias, worst)
}

/// Frobenius error, parameter count and measured outage bias for each model.
pub fn compare_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let r = jakes_matrix(cfg.n, cfg.w)?;
    let eig = eigendecompose(&r)?;
    let k = cfg.k.unwrap_or_else(|| dof_rule(cfg.w)).min(cfg.n);
    let bcm = bcm_partition(cfg.n, cfg.blocks.min(cfg.n), &r)?;
    let vbcm = vbcm_partition(&r);
    let models: Vec<(Method, Matrix, String)> = vec![
        (Method::KlMc { k }, eig.truncate(k)?.covariance(), format!("{k} modes")),
        (Method::Bcm { d: bcm.num_blocks() }, block_covariance(&bcm, cfg.n)?, format!("{} blocks", bcm.num_blocks())),
        (Method::Vbcm, block_covariance(&vbcm, cfg.n)?, format!("{} blocks", vbcm.num_blocks())),
        (Method::Iid, Matrix::identity(cfg.n), "none".into()),
    ];
    let exact = curve(cfg, Method::ExactMc, Metric::Outage)?;
    let mut t = Table::new(&["method", "structure", "frobenius_rel_error", "max_outage_gap", "bias_direction", "trials"]);
    for (m, cov, structure) in models {
        let err = frobenius_rel_error(&r, &cov)?;
        let c = curve(cfg, m, Metric::Outage)?;
        let (bias, gap) = bias_direction(&c, &exact, 1e-3);
        let trials = if m.is_monte_carlo() { cfg.trials.to_string() } else { String::new() };
        t.push(vec![m.to_string(), structure, fmt_g(err), fmt_g(gap), bias.as_str().into(), trials]);
    }
    Ok(t)
}

/// Shared tail of the single-run commands: emit the table and, when writing
/// to a file, a `<file>.json` sidecar next to it (`out.csv` -> `out.csv.json`).
pub fn finish(cfg: &RunConfig, command: &str, table: Table, stdout: &mut dyn Write) -> Result<(), CliError> {
    table.emit(cfg.out.as_deref(), stdout)?;
    if let Some(path) = &cfg.out {
        let mut side = path.clone().into_os_string();
        side.push(".json");
        let side = std::path::PathBuf::from(side);
        write_sidecar(&side, command, cfg, json!({ "csv": path, "columns": table.header }))?;
    }
    Ok(())
}
