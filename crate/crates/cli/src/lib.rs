//! Library side of the `adaptid` command: config loading, the individual
//! commands and the table sweep. `main.rs` only parses arguments and maps
//! outcomes to exit codes.

pub mod tables;

use std::path::{Path, PathBuf};

use adaptid::evolution::estimate_gt;
use adaptid::io::{read_curve, write_autocorr, write_eigenvalues, write_psd, write_report};
use adaptid::spectral::DEFAULT_PSD_GRID;
use adaptid::{
    autocorr_estimate, convergence_estimate, experiment_signals, psd_from_autocorr, run_experiment,
    toeplitz_from_autocorr, Error, ExperimentConfig, Result, Structure,
};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Environment variable that replaces the seed of every loaded config.
pub const SEED_ENV: &str = "ADAPTID_SEED";

pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))
        }),
        Err(_) => Ok(None),
    }
}

pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into())
}

fn out_dir(config: &Path, out: Option<&Path>) -> PathBuf {
    match out {
        Some(d) => d.to_path_buf(),
        None => config
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Converged { iteration: usize, report: PathBuf },
    NotConverged { report: PathBuf },
    Diverged { iteration: Option<usize> },
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunOutcome::Converged { .. } => EXIT_OK,
            _ => EXIT_NOT_CONVERGED,
        }
    }
}

/// `run <config>`: one experiment, artifacts next to the config or in `out`.
pub fn run_command(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<RunOutcome> {
    let cfg = load_config(config, seed)?;
    let report = match run_experiment::<f64>(&cfg) {
        Ok(r) => r,
        Err(Error::Divergence { iteration }) => return Ok(RunOutcome::Diverged { iteration }),
        Err(e) => return Err(e),
    };
    let path = write_report(&out_dir(config, out), &stem_of(config), &report)?;
    Ok(match report.converged_at {
        Some(iteration) => RunOutcome::Converged {
            iteration,
            report: path,
        },
        None => RunOutcome::NotConverged { report: path },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub order: usize,
    pub samples: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub disparity: f64,
    pub psd_min: f64,
    pub psd_max: f64,
    pub mu_bound: f64,
    /// Only present when the config carries a positive step size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// `spectrum <config>`: input statistics for the config's filter order.
///
/// The order is `N` for FIR structures and `M + 1` (the feedforward taps) for IIR.
pub fn spectrum_command(
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<SpectrumSummary> {
    let cfg = load_config(config, seed)?;
    let order = match cfg.structure()? {
        Structure::Fir { order } => order,
        Structure::Iir { m, .. } => m + 1,
    };
    let (x, _) = experiment_signals::<f64>(&cfg)?;
    let r = autocorr_estimate(&x, order)?;
    let eigs = toeplitz_from_autocorr(&r, order)?.eigenvalues();
    let psd = psd_from_autocorr(&r, DEFAULT_PSD_GRID)?;
    // Any positive step gives the eigenvalue-derived fields; tau needs the real one.
    let est = convergence_estimate(&eigs, 1.0)?;
    let tau = cfg
        .mu
        .filter(|&m| m > 0.0)
        .map(|m| convergence_estimate(&eigs, m).map(|e| e.tau))
        .transpose()?;

    let dir = out_dir(config, out);
    std::fs::create_dir_all(&dir)?;
    let stem = stem_of(config);
    write_autocorr(&dir.join(format!("{stem}_autocorr.csv")), &r)?;
    write_psd(&dir.join(format!("{stem}_psd.csv")), &psd)?;
    write_eigenvalues(&dir.join(format!("{stem}_eigenvalues.csv")), &eigs)?;

    Ok(SpectrumSummary {
        order,
        samples: x.len(),
        lambda_min: est.lambda_min,
        lambda_max: est.lambda_max,
        disparity: est.disparity,
        psd_min: psd.min(),
        psd_max: psd.max(),
        mu_bound: est.mu_bound,
        tau,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GtSummary {
    pub gt: f64,
    pub plateau_start: usize,
    pub delta: usize,
}

/// `estimate-gt <curve.csv> --delta D`.
pub fn estimate_gt_command(curve: &Path, delta: usize) -> Result<GtSummary> {
    let points = read_curve::<f64>(curve)?;
    let db: Vec<f64> = points.iter().map(|p| p.mse_db_window).collect();
    let (gt, plateau_start) = estimate_gt(&db, delta)?;
    Ok(GtSummary {
        gt,
        plateau_start,
        delta,
    })
}
