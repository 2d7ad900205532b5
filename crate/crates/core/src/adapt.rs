//! Machinery shared by every LMS-driven run: the filter abstraction, run
//! configuration and the per-sample driver that records the learning curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sysid::{mse_db, CurvePoint, ExperimentReport, FilterCoefficients};

/// Windowed MSE growth (relative to the first window) that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Output and error of one adaptation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<T> {
    pub y: T,
    pub eps: T,
}

/// A filter that can be adapted sample by sample or run with frozen coefficients.
pub trait AdaptiveFilter<T: Real>: Clone {
    /// One LMS adaptation step on `(x_new, d)`.
    fn adapt(&mut self, x_new: T, d: T, mu: T) -> Result<Step<T>>;

    /// Advances the filter by one sample without touching the coefficients.
    fn filter(&mut self, x_new: T) -> Result<T>;

    /// Coefficients as a flat gene vector.
    fn genes(&self) -> Vec<T>;

    /// Replaces the coefficients; recursive filters stabilize the result.
    fn set_genes(&mut self, genes: &[T]) -> Result<()>;

    fn coefficients(&self) -> FilterCoefficients<T>;

    /// Mean squared error of the frozen filter over `(x, d)`, starting from the
    /// current internal state. The filter itself is not modified.
    fn frozen_mse(&self, x: &[T], d: &[T]) -> Result<T> {
        if x.is_empty() {
            return Err(Error::invalid("evaluation block is empty"));
        }
        let mut probe = self.clone();
        let mut acc = T::zero();
        for (&xi, &di) in x.iter().zip(d) {
            let e = di - probe.filter(xi)?;
            acc = acc + e * e;
        }
        Ok(acc / T::from_usize_lossy(x.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmsRunConfig<T> {
    pub mu: T,
    pub max_iterations: usize,
    pub convergence_threshold_db: T,
    /// Iterations the windowed MSE must stay below the threshold.
    pub hold: usize,
    /// Trailing window `t_e` of squared errors behind the dB learning curve.
    pub mse_window: usize,
    /// Stop as soon as convergence is confirmed instead of using the whole record.
    pub stop_on_convergence: bool,
}

impl<T: Real> LmsRunConfig<T> {
    pub fn new(mu: T) -> Self {
        Self {
            mu,
            max_iterations: 10_000,
            convergence_threshold_db: T::c(-140.0),
            hold: 8,
            mse_window: 8,
            stop_on_convergence: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu < T::zero() {
            return Err(Error::invalid("mu must be finite and non-negative"));
        }
        if self.mse_window == 0 {
            return Err(Error::invalid("mse_window must be at least 1"));
        }
        if self.hold == 0 {
            return Err(Error::invalid("hold must be at least 1"));
        }
        Ok(())
    }
}

/// Learning-curve bookkeeping shared by the pure and hybrid drivers.
pub(crate) struct CurveRecorder<T> {
    window: usize,
    recent: Vec<T>,
    head: usize,
    reference: T,
    pub curve: Vec<CurvePoint<T>>,
    streak_start: Option<usize>,
}

impl<T: Real> CurveRecorder<T> {
    pub fn new(window: usize, capacity: usize) -> Self {
        Self {
            window,
            recent: Vec::with_capacity(window),
            head: 0,
            reference: T::zero(),
            curve: Vec::with_capacity(capacity),
            streak_start: None,
        }
    }

    /// Records `eps` for iteration `n`, returning the windowed MSE.
    pub fn record(&mut self, n: usize, eps: T) -> Result<T> {
        let e2 = eps * eps;
        if self.recent.len() < self.window {
            self.recent.push(e2);
        } else {
            self.recent[self.head] = e2;
            self.head = (self.head + 1) % self.window;
        }
        let wmse = self.recent.iter().copied().sum::<T>() / T::from_usize_lossy(self.recent.len());
        if n < self.window {
            self.reference = self.reference.max(wmse);
        } else {
            let floor = self.reference.max(T::epsilon());
            if !wmse.is_finite() || wmse > T::c(DIVERGENCE_FACTOR) * floor {
                return Err(Error::Divergence { iteration: Some(n) });
            }
        }
        self.curve.push(CurvePoint {
            iteration: n,
            eps_squared: e2,
            mse_db_window: mse_db(wmse)?,
        });
        Ok(wmse)
    }

    /// Updates the below-threshold streak; returns the convergence iteration once
    /// the latest point completes a run of `hold + 1` points at or below threshold.
    pub fn check_converged(&mut self, threshold_db: T, hold: usize) -> Option<usize> {
        let last = self.curve.last()?;
        if last.mse_db_window <= threshold_db {
            let start = *self.streak_start.get_or_insert(last.iteration);
            if last.iteration - start >= hold {
                return Some(start);
            }
        } else {
            self.streak_start = None;
        }
        None
    }

    pub fn db_at(&self, n: usize) -> T {
        self.curve[n].mse_db_window
    }
}

/// Runs `filter` over the record, calling `hook` after every adaptation step.
///
/// The hook may alter the filter (the hybrid learner swaps coefficients there)
/// and returns an optional event to log.
pub(crate) fn drive<T, F, H, E>(
    filter: &mut F,
    x: &[T],
    d: &[T],
    cfg: &LmsRunConfig<T>,
    mut hook: H,
) -> Result<(CurveRecorder<T>, Option<usize>, Vec<E>)>
where
    T: Real,
    F: AdaptiveFilter<T>,
    H: FnMut(usize, &mut F, &CurveRecorder<T>) -> Result<Option<E>>,
{
    cfg.validate()?;
    if x.len() != d.len() {
        return Err(Error::invalid("input and desired signals differ in length"));
    }
    let steps = cfg.max_iterations.min(x.len());
    let mut rec = CurveRecorder::new(cfg.mse_window, steps);
    let mut events = Vec::new();
    let mut converged = None;
    for n in 0..steps {
        let step = filter
            .adapt(x[n], d[n], cfg.mu)
            .map_err(|e| e.at_iteration(n))?;
        rec.record(n, step.eps)?;
        if let Some(event) = hook(n, filter, &rec)? {
            events.push(event);
        }
        if converged.is_none() {
            converged = rec.check_converged(cfg.convergence_threshold_db, cfg.hold);
            if converged.is_some() && cfg.stop_on_convergence {
                break;
            }
        }
    }
    Ok((rec, converged, events))
}

pub(crate) fn report_from<T: Real, F: AdaptiveFilter<T>>(
    filter: &F,
    rec: CurveRecorder<T>,
    converged_at: Option<usize>,
) -> ExperimentReport<T> {
    let final_mse_db = rec.curve.last().map(|p| p.mse_db_window);
    ExperimentReport {
        curve: rec.curve,
        converged_at,
        final_weights: filter.coefficients(),
        final_mse_db,
        trigger_events: Vec::new(),
        seed: None,
        config: None,
    }
}
