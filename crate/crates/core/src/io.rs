//! CSV and JSON file formats.
//!
//! Every CSV has a header row. Column names:
//!
//! | file            | columns                                                  |
//! |-----------------|----------------------------------------------------------|
//! | signal          | `n,x`                                                    |
//! | taps            | `k,h`                                                    |
//! | autocorrelation | `lag,r`                                                  |
//! | PSD             | `omega,X`                                                |
//! | eigenvalues     | `i,lambda`                                               |
//! | learning curve  | `iteration,eps_squared,mse_db_window`                    |
//! | trigger log     | `iteration,delta_e,triggered,best_candidate_mse_db`      |
//! | coefficients    | `kind,index,value` with `kind` one of `b`, `a`           |

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::TriggerEvent;
use crate::scalar::Real;
use crate::signals::{FilterTaps, Signal};
use crate::spectral::{AutocorrSeq, PsdCurve};
use crate::sysid::{CurvePoint, ExperimentReport, FilterCoefficients, ReportDocument};

fn write_rows<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<D>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct IndexedRow {
    n: usize,
    x: f64,
}

#[derive(Serialize, Deserialize)]
struct TapRow {
    k: usize,
    h: f64,
}

#[derive(Serialize, Deserialize)]
struct LagRow {
    lag: usize,
    r: f64,
}

#[derive(Serialize, Deserialize)]
struct PsdRow {
    omega: f64,
    #[serde(rename = "X")]
    x: f64,
}

#[derive(Serialize, Deserialize)]
struct EigRow {
    i: usize,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct CoefRow {
    kind: String,
    index: usize,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct TriggerRow {
    iteration: usize,
    delta_e: f64,
    triggered: bool,
    best_candidate_mse_db: Option<f64>,
}

pub fn write_signal<T: Real>(path: &Path, x: &Signal<T>) -> Result<()> {
    write_rows(
        path,
        x.as_slice().iter().enumerate().map(|(n, v)| IndexedRow {
            n,
            x: v.to_f64_lossy(),
        }),
    )
}

pub fn read_signal<T: Real>(path: &Path) -> Result<Signal<T>> {
    let rows: Vec<IndexedRow> = read_rows(path)?;
    Signal::new(rows.into_iter().map(|r| T::c(r.x)).collect())
}

pub fn write_taps<T: Real>(path: &Path, h: &FilterTaps<T>) -> Result<()> {
    write_rows(
        path,
        h.as_slice().iter().enumerate().map(|(k, v)| TapRow {
            k,
            h: v.to_f64_lossy(),
        }),
    )
}

pub fn read_taps<T: Real>(path: &Path) -> Result<FilterTaps<T>> {
    let rows: Vec<TapRow> = read_rows(path)?;
    FilterTaps::new(rows.into_iter().map(|r| T::c(r.h)).collect())
}

pub fn write_autocorr<T: Real>(path: &Path, r: &AutocorrSeq<T>) -> Result<()> {
    write_rows(
        path,
        r.lags.iter().enumerate().map(|(lag, v)| LagRow {
            lag,
            r: v.to_f64_lossy(),
        }),
    )
}

pub fn read_autocorr<T: Real>(path: &Path) -> Result<AutocorrSeq<T>> {
    let rows: Vec<LagRow> = read_rows(path)?;
    AutocorrSeq::from_lags(rows.into_iter().map(|r| T::c(r.r)).collect())
}

pub fn write_psd<T: Real>(path: &Path, psd: &PsdCurve<T>) -> Result<()> {
    write_rows(
        path,
        psd.grid.iter().zip(&psd.values).map(|(w, v)| PsdRow {
            omega: w.to_f64_lossy(),
            x: v.to_f64_lossy(),
        }),
    )
}

pub fn read_psd<T: Real>(path: &Path) -> Result<PsdCurve<T>> {
    let rows: Vec<PsdRow> = read_rows(path)?;
    Ok(PsdCurve {
        grid: rows.iter().map(|r| T::c(r.omega)).collect(),
        values: rows.iter().map(|r| T::c(r.x)).collect(),
    })
}

pub fn write_eigenvalues<T: Real>(path: &Path, eigs: &[T]) -> Result<()> {
    write_rows(
        path,
        eigs.iter().enumerate().map(|(i, v)| EigRow {
            i,
            lambda: v.to_f64_lossy(),
        }),
    )
}

pub fn read_eigenvalues<T: Real>(path: &Path) -> Result<Vec<T>> {
    let rows: Vec<EigRow> = read_rows(path)?;
    Ok(rows.into_iter().map(|r| T::c(r.lambda)).collect())
}

pub fn write_curve<T: Real>(path: &Path, curve: &[CurvePoint<T>]) -> Result<()> {
    write_rows(path, curve)
}

pub fn read_curve<T: Real>(path: &Path) -> Result<Vec<CurvePoint<T>>> {
    read_rows(path)
}

pub fn write_trigger_log<T: Real>(path: &Path, events: &[TriggerEvent<T>]) -> Result<()> {
    write_rows(
        path,
        events.iter().map(|e| TriggerRow {
            iteration: e.iteration,
            delta_e: e.delta_e.to_f64_lossy(),
            triggered: e.triggered,
            best_candidate_mse_db: e.best_candidate_mse_db.map(|v| v.to_f64_lossy()),
        }),
    )
}

pub fn read_trigger_log<T: Real>(path: &Path) -> Result<Vec<TriggerEvent<T>>> {
    let rows: Vec<TriggerRow> = read_rows(path)?;
    Ok(rows
        .into_iter()
        .map(|r| TriggerEvent {
            iteration: r.iteration,
            delta_e: T::c(r.delta_e),
            triggered: r.triggered,
            best_candidate_mse_db: r.best_candidate_mse_db.map(T::c),
        })
        .collect())
}

pub fn write_coefficients<T: Real>(path: &Path, c: &FilterCoefficients<T>) -> Result<()> {
    let rows =
        c.b.iter()
            .enumerate()
            .map(|(i, v)| ("b", i, v))
            .chain(c.a.iter().enumerate().map(|(i, v)| ("a", i, v)))
            .map(|(kind, index, v)| CoefRow {
                kind: kind.to_string(),
                index,
                value: v.to_f64_lossy(),
            });
    write_rows(path, rows)
}

pub fn read_coefficients<T: Real>(path: &Path) -> Result<FilterCoefficients<T>> {
    let rows: Vec<CoefRow> = read_rows(path)?;
    let mut c = FilterCoefficients {
        b: Vec::new(),
        a: Vec::new(),
    };
    for r in rows {
        match r.kind.as_str() {
            "b" => c.b.push(T::c(r.value)),
            "a" => c.a.push(T::c(r.value)),
            other => return Err(Error::Csv(format!("unknown coefficient kind `{other}`"))),
        }
    }
    Ok(c)
}

/// Writes `{stem}_report.json` and `{stem}_curve.csv` into `dir`, plus
/// `{stem}_triggers.csv` when the run logged any gradient checks. Returns the
/// report path.
pub fn write_report<T: Real>(
    dir: &Path,
    stem: &str,
    report: &ExperimentReport<T>,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let curve_file = format!("{stem}_curve.csv");
    write_curve(&dir.join(&curve_file), &report.curve)?;
    if !report.trigger_events.is_empty() {
        write_trigger_log(
            &dir.join(format!("{stem}_triggers.csv")),
            &report.trigger_events,
        )?;
    }
    let doc = report.to_document(&curve_file);
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    let path = dir.join(format!("{stem}_report.json"));
    let mut f = File::create(&path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(path)
}

pub fn read_report_document<T: Real>(path: &Path) -> Result<ReportDocument<T>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))
}
