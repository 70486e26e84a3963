use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use fas_kl::baselines::{BCM_RULE, RHO_FIT_RULE, VBCM_RULE};
use serde_json::json;

use crate::config::RunConfig;
use crate::CliError;

/// Describes the quadrature integrand recorded in sidecars.
pub const GH_INTEGRAND: &str = "radial conditional: mode 1 integrated in closed form given \
     the direction of the remaining modes; origin node dropped and weights renormalised";

/// `%.10g`: ten significant digits, trailing zeros removed, exponent form
/// outside `[1e-5, 1e10)`.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Rounding can carry into the next decade, so take the exponent after it.
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-5..10).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{v:.*}", (9 - exp) as usize))
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn fmt_opt(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, w: impl Write) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Writes to `path`, or to `stdout` when no path is given.
    pub fn emit(&self, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
        match path {
            Some(p) => {
                let f = std::fs::File::create(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
                self.write_to(std::io::BufWriter::new(f)).map_err(|e| csv_io(p, e))
            }
            None => self.write_to(stdout).map_err(|e| csv_io(Path::new("<stdout>"), e)),
        }
    }
}

fn csv_io(path: &Path, e: csv::Error) -> CliError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::Io { path: path.to_path_buf(), source }
}

/// JSON record of how an output was produced. Only `timestamp_unix` varies
/// between identical runs.
pub fn write_sidecar(path: &Path, command: &str, cfg: &RunConfig, extra: serde_json::Value) -> Result<(), CliError> {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let doc = json!({
        "command": command,
        "config": cfg,
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "modeling_choices": {
            "bcm_partition": BCM_RULE,
            "bcm_rho_fit": RHO_FIT_RULE,
            "vbcm_partition": VBCM_RULE,
            "gh_integrand": GH_INTEGRAND,
            "outage_threshold": "x = gamma_th / 10^(snr_db/10)",
        },
        "outputs": extra,
        "timestamp_unix": ts,
    });
    let text = serde_json::to_string_pretty(&doc).expect("sidecar serialises");
    std::fs::write(path, text + "\n").map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
