//! LMS with a genetic escape hatch.
//!
//! Every `gamma` iterations the controller looks at the slope of the windowed-MSE
//! learning curve, `dE(n) = (e(n) - e(n - gamma)) / gamma` in dB per iteration.
//! When `|dE| < GT` the LMS run is considered stalled: `m` offsprings of the
//! current coefficients are drawn, each candidate (parent included) is scored by
//! its frozen MSE over the next `t_e` samples, and adaptation resumes from the
//! best one.

use serde::{Deserialize, Serialize};

use super::{spawn_offsprings, Chromosome, TriggerEvent};
use crate::adapt::{drive, report_from, AdaptiveFilter, LmsRunConfig};
use crate::error::{Error, Result};
use crate::fir::FirFilter;
use crate::iir::IirFilter;
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::signals::Signal;
use crate::sysid::{mse_db, ExperimentReport, FilterCoefficients, Structure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmsGaConfig<T> {
    /// Offsprings per evolution.
    pub m: usize,
    /// Permissible offset `D` per gene.
    pub offset_d: T,
    /// Window for the error-gradient estimate, also the check cadence.
    pub gamma: usize,
    /// `GT`, in dB per iteration.
    pub gradient_threshold: T,
    /// Evaluation block for candidate MSE.
    pub t_e: usize,
}

impl<T: Real> LmsGaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.gamma == 0 || self.t_e == 0 {
            return Err(Error::invalid("m, gamma and t_e must be at least 1"));
        }
        if !(self.offset_d >= T::zero()) || !self.offset_d.is_finite() {
            return Err(Error::invalid("offset D must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Runs the hybrid learner on a filter of the given structure.
pub fn lms_ga_run<T: Real>(
    x: &Signal<T>,
    d: &Signal<T>,
    structure: Structure,
    initial: Option<&FilterCoefficients<T>>,
    cfg: &LmsGaConfig<T>,
    run_cfg: &LmsRunConfig<T>,
    rng: &mut RngStream,
) -> Result<ExperimentReport<T>> {
    match structure {
        Structure::Fir { order } => {
            let filter = match initial {
                Some(c) if c.b.len() == order && c.a.is_empty() => {
                    FirFilter::with_weights(c.b.clone())?
                }
                Some(_) => return Err(Error::invalid("initial weights do not match the order")),
                None => FirFilter::new(order)?,
            };
            run_with(filter, x, d, cfg, run_cfg, rng)
        }
        Structure::Iir { m, l } => {
            let filter = match initial {
                Some(c) if c.b.len() == m + 1 && c.a.len() == l => {
                    IirFilter::with_coefficients(c.b.clone(), c.a.clone())?
                }
                Some(_) => return Err(Error::invalid("initial coefficients do not match (M, L)")),
                None => IirFilter::new(m, l),
            };
            run_with(filter, x, d, cfg, run_cfg, rng)
        }
    }
}

/// Hybrid run on an arbitrary adaptive filter.
pub(crate) fn run_with<T: Real, F: AdaptiveFilter<T>>(
    mut filter: F,
    x: &Signal<T>,
    d: &Signal<T>,
    cfg: &LmsGaConfig<T>,
    run_cfg: &LmsRunConfig<T>,
    rng: &mut RngStream,
) -> Result<ExperimentReport<T>> {
    cfg.validate()?;
    let xs = x.as_slice();
    let ds = d.as_slice();
    let gamma = cfg.gamma;
    let gamma_t = T::from_usize_lossy(gamma);

    let (rec, converged, events) = drive(&mut filter, xs, ds, run_cfg, |n, f, rec| {
        if n < gamma || n % gamma != 0 {
            return Ok(None);
        }
        let block = (n + 1)..(n + 1 + cfg.t_e);
        if block.end > xs.len() {
            return Ok(None);
        }
        let delta_e = (rec.db_at(n) - rec.db_at(n - gamma)) / gamma_t;
        if !(delta_e.abs() < cfg.gradient_threshold) {
            return Ok(Some(TriggerEvent {
                iteration: n,
                delta_e,
                triggered: false,
                best_candidate_mse_db: None,
            }));
        }

        let parent = Chromosome::new(f.genes());
        let offspring = spawn_offsprings(&parent, cfg.m, cfg.offset_d, rng);
        let (bx, bd) = (&xs[block.clone()], &ds[block]);

        let mut best_genes = parent.genes.clone();
        let mut best_mse = f.frozen_mse(bx, bd)?;
        for child in offspring {
            let mut probe = f.clone();
            probe.set_genes(&child.genes)?;
            let mse = probe.frozen_mse(bx, bd)?;
            if mse < best_mse {
                best_mse = mse;
                best_genes = probe.genes();
            }
        }
        f.set_genes(&best_genes)?;
        Ok(Some(TriggerEvent {
            iteration: n,
            delta_e,
            triggered: true,
            best_candidate_mse_db: Some(mse_db(best_mse)?),
        }))
    })?;

    let mut report = report_from(&filter, rec, converged);
    report.trigger_events = events;
    Ok(report)
}
