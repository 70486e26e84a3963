//! Figure drivers. Each writes one CSV per curve into the output directory
//! plus `<id>.json` describing the run.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fas_kl::baselines::{bcm_partition, block_covariance, frobenius_rel_error};
use fas_kl::infotheory::{entropy_fraction, kl_rd_point, rd_curve};
use fas_kl::outage::Method;
use fas_kl::spectral::{dof_rule, eigendecompose, eigendecompose_dense, jakes_matrix, min_modes};
use serde_json::json;

use crate::commands::{curve_table, jakes_eig, Metric};
use crate::config::{CommonArgs, Defaults};
use crate::output::{fmt_g, write_sidecar, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    /// Outage: exact vs KL truncations and the rank-1 closed form.
    Fig1,
    /// Truncation error versus K across apertures and port counts.
    Fig2,
    /// Outage: KL vs block-correlation baselines.
    Fig3,
    /// Covariance error versus N.
    Fig4,
    /// Entropy and power fractions versus K.
    Fig5,
    /// Ergodic capacity versus SNR.
    Fig6,
    /// Rate-distortion curves and KL operating points.
    Fig7,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }

    fn defaults(self) -> Defaults<'static> {
        let base = Defaults::default();
        match self {
            FigureId::Fig1 => Defaults { methods: &["exact_mc", "kl_mc(1)", "kl_mc(3)", "kl_mc(5)", "kl_mc(8)", "rank1"], ..base },
            FigureId::Fig3 => Defaults { methods: &["exact_mc", "kl_mc(5)", "bcm(4)", "vbcm", "iid", "single"], ..base },
            FigureId::Fig5 => Defaults { n: 40, ..base },
            FigureId::Fig6 => Defaults {
                methods: &["exact_mc", "kl_mc(1)", "kl_mc(3)", "kl_mc(5)", "kl_mc(8)", "rank1"],
                trials: fas_kl::capacity::DEFAULT_TRIALS,
                ..base
            },
            _ => base,
        }
    }
}

pub const FIG2_CASES: [(f64, usize); 6] = [(1.0, 20), (2.0, 20), (3.0, 10), (3.0, 20), (3.0, 40), (5.0, 20)];
pub const FIG4_PORTS: [usize; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];
pub const FIG5_APERTURES: [f64; 4] = [1.0, 2.0, 3.0, 5.0];
pub const DEFAULT_DIR: &str = "figures";

/// `kl_gh(2,10)` -> `kl_gh_2_10`.
pub fn file_stem(m: Method) -> String {
    m.to_string().replace(['(', ','], "_").replace(')', "")
}

fn fmt_w(w: f64) -> String {
    fmt_g(w).replace('.', "p")
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn write(&mut self, stem: &str, t: &Table) -> Result<(), CliError> {
        let name = format!("{stem}.csv");
        t.emit(Some(&self.dir.join(&name)), &mut std::io::sink())?;
        self.files.push(name);
        Ok(())
    }
}

pub fn run(id: FigureId, args: &CommonArgs) -> Result<PathBuf, CliError> {
    let cfg = args.resolve(&id.defaults())?;
    let dir = output_dir(cfg.out.as_deref(), id);
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let mut out = Writer { dir: dir.clone(), files: Vec::new() };
    let mut extra = serde_json::Map::new();
    match id {
        FigureId::Fig1 | FigureId::Fig3 | FigureId::Fig6 => {
            let metric = if id == FigureId::Fig6 { Metric::Capacity } else { Metric::Outage };
            for &m in &cfg.methods {
                out.write(&file_stem(m), &curve_table(&cfg, &[m], metric)?)?;
            }
        }
        FigureId::Fig2 => {
            let mut knees = Vec::new();
            for (w, n) in FIG2_CASES {
                let eig = jakes_eig(n, w)?;
                let mut t = Table::new(&["k", "epsilon", "w", "n"]);
                for k in 1..=n {
                    t.push(vec![k.to_string(), fmt_g(eig.truncate(k)?.epsilon()), fmt_g(w), n.to_string()]);
                }
                out.write(&format!("eps_w{}_n{n}", fmt_w(w)), &t)?;
                knees.push(json!({ "w": w, "n": n, "min_modes_1pct": min_modes(&eig, 0.01)?, "dof_rule": dof_rule(w) }));
            }
            extra.insert("knees".into(), knees.into());
        }
        FigureId::Fig4 => fig4(&cfg, &mut out)?,
        FigureId::Fig5 => {
            for w in FIG5_APERTURES {
                let eig = jakes_eig(cfg.n, w)?;
                let mut t = Table::new(&["k", "power_frac", "entropy_frac", "dof_rule"]);
                for k in 1..=cfg.n {
                    let h = entropy_fraction(&eig, cfg.eta, k).map(fmt_g).unwrap_or_default();
                    t.push(vec![k.to_string(), fmt_g(eig.truncate(k)?.power_fraction()), h, dof_rule(w).to_string()]);
                }
                out.write(&format!("fractions_w{}_n{}", fmt_w(w), cfg.n), &t)?;
            }
        }
        FigureId::Fig7 => fig7(&cfg, &mut out)?,
    }
    extra.insert("csv".into(), out.files.clone().into());
    write_sidecar(&dir.join(format!("{}.json", id.name())), id.name(), &cfg, extra.into())?;
    Ok(dir)
}

fn fig4(cfg: &crate::config::RunConfig, out: &mut Writer) -> Result<(), CliError> {
    let cols = ["n", "model", "param", "frobenius_rel_error"];
    let mut curves: Vec<(String, Table)> = ["kl_k5", "kl_k7", "bcm_d5", "bcm_quarter"]
        .iter()
        .map(|s| (s.to_string(), Table::new(&cols)))
        .collect();
    for n in FIG4_PORTS {
        let r = jakes_matrix(n, cfg.w)?;
        let eig = eigendecompose(&r)?;
        let params = [5.min(n), 7.min(n), 5.min(n), n.div_ceil(4)];
        for (i, (_, t)) in curves.iter_mut().enumerate() {
            let d = params[i];
            let (model, cov) = if i < 2 {
                ("kl", eig.truncate(d)?.covariance())
            } else {
                ("bcm", block_covariance(&bcm_partition(n, d, &r)?, n)?)
            };
            t.push(vec![n.to_string(), model.into(), d.to_string(), fmt_g(frobenius_rel_error(&r, &cov)?)]);
        }
    }
    for (stem, t) in curves {
        out.write(&stem, &t)?;
    }
    Ok(())
}

/// Log-spaced water levels from `η λ_max` down four decades.
fn theta_grid(eta: f64, top: f64) -> Vec<f64> {
    (0..=120).map(|i| eta * top * 10f64.powf(-i as f64 / 30.0)).collect()
}

fn rd_table(vals: &[f64], eta: f64) -> Result<Table, CliError> {
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let mut t = Table::new(&["theta", "rate_bits", "distortion", "distortion_per_port"]);
    for p in rd_curve(vals, eta, &theta_grid(eta, top))? {
        t.push(vec![fmt_g(p.theta), fmt_g(p.rate_bits), fmt_g(p.distortion), fmt_g(p.distortion_per_port)]);
    }
    Ok(t)
}

fn fig7(cfg: &crate::config::RunConfig, out: &mut Writer) -> Result<(), CliError> {
    let r = jakes_matrix(cfg.n, cfg.w)?;
    let eig = eigendecompose(&r)?;
    let bcm = eigendecompose_dense(&block_covariance(&bcm_partition(cfg.n, cfg.blocks.min(cfg.n), &r)?, cfg.n)?)?;
    out.write("rd_true", &rd_table(eig.values(), cfg.eta)?)?;
    out.write(&format!("rd_bcm_{}", cfg.blocks.min(cfg.n)), &rd_table(bcm.values(), cfg.eta)?)?;
    out.write("rd_iid", &rd_table(&vec![1.0; cfg.n], cfg.eta)?)?;
    let mut t = Table::new(&["k", "theta", "rate_bits", "distortion", "distortion_per_port"]);
    for k in 1..=9.min(cfg.n - 1).max(1) {
        let p = kl_rd_point(&eig, cfg.eta, k)?;
        t.push(vec![k.to_string(), fmt_g(p.theta), fmt_g(p.rate_bits), fmt_g(p.distortion), fmt_g(p.distortion_per_port)]);
    }
    out.write("kl_points", &t)
}

/// Directory a figure writes into, for callers that need to locate outputs.
pub fn output_dir(base: Option<&Path>, id: FigureId) -> PathBuf {
    base.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_DIR)).join(id.name())
}
