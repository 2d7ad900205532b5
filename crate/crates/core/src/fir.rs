//! Transversal (tapped delay line) adaptive filter trained by LMS.

use serde::{Deserialize, Serialize};

use crate::adapt::{drive, report_from, AdaptiveFilter, LmsRunConfig, Step};
use crate::error::{Error, Result};
use crate::scalar::{dot, push_front, Real};
use crate::signals::Signal;
use crate::sysid::{ExperimentReport, FilterCoefficients};

/// Weights `C` and delay line `X = [x(n), x(n-1), ..., x(n-N+1)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirFilter<T> {
    weights: Vec<T>,
    delay_line: Vec<T>,
}

impl<T: Real> FirFilter<T> {
    /// Order-`n` filter with zero weights and an empty delay line.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("FIR order must be at least 1"));
        }
        Ok(Self {
            weights: vec![T::zero(); order],
            delay_line: vec![T::zero(); order],
        })
    }

    pub fn with_weights(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("FIR order must be at least 1"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights must be finite"));
        }
        let n = weights.len();
        Ok(Self {
            weights,
            delay_line: vec![T::zero(); n],
        })
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Most recent input first.
    pub fn delay_line(&self) -> &[T] {
        &self.delay_line
    }

    /// One LMS iteration:
    ///
    /// ```text
    /// y(n) = C(n-1)^T X(n)
    /// e(n) = d(n) - y(n)
    /// C(n) = C(n-1) + 2 mu e(n) X(n)
    /// ```
    pub fn lms_step(&mut self, x_new: T, d: T, mu: T) -> Result<Step<T>> {
        if !x_new.is_finite() || !d.is_finite() {
            return Err(Error::InvalidSample { index: None });
        }
        if !mu.is_finite() {
            return Err(Error::invalid("step size must be finite"));
        }
        push_front(&mut self.delay_line, x_new);
        let y = dot(&self.weights, &self.delay_line);
        let eps = d - y;
        let gain = T::c(2.0) * mu * eps;
        for (w, &x) in self.weights.iter_mut().zip(&self.delay_line) {
            *w = *w + gain * x;
        }
        if !y.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence { iteration: None });
        }
        Ok(Step { y, eps })
    }
}

impl<T: Real> AdaptiveFilter<T> for FirFilter<T> {
    fn adapt(&mut self, x_new: T, d: T, mu: T) -> Result<Step<T>> {
        self.lms_step(x_new, d, mu)
    }

    fn filter(&mut self, x_new: T) -> Result<T> {
        if !x_new.is_finite() {
            return Err(Error::InvalidSample { index: None });
        }
        push_front(&mut self.delay_line, x_new);
        Ok(dot(&self.weights, &self.delay_line))
    }

    fn genes(&self) -> Vec<T> {
        self.weights.clone()
    }

    fn set_genes(&mut self, genes: &[T]) -> Result<()> {
        if genes.len() != self.weights.len() {
            return Err(Error::invalid("gene count does not match the filter order"));
        }
        self.weights.copy_from_slice(genes);
        Ok(())
    }

    fn coefficients(&self) -> FilterCoefficients<T> {
        FilterCoefficients {
            b: self.weights.clone(),
            a: Vec::new(),
        }
    }
}

/// Largest step size that keeps the mean weight recursion stable, `1 / lambda_max`.
pub fn mu_stability_bound<T: Real>(lambda_max: T) -> Result<T> {
    if !(lambda_max > T::zero()) || !lambda_max.is_finite() {
        return Err(Error::invalid("lambda_max must be positive and finite"));
    }
    Ok(T::one() / lambda_max)
}

/// LMS identification of `d` from `x` with an order-`order` transversal filter.
///
/// `initial_weights` defaults to zeros.
pub fn run_fir_lms<T: Real>(
    x: &Signal<T>,
    d: &Signal<T>,
    order: usize,
    cfg: &LmsRunConfig<T>,
    initial_weights: Option<&[T]>,
) -> Result<ExperimentReport<T>> {
    if x.len() != d.len() {
        return Err(Error::invalid("input and desired signals differ in length"));
    }
    if x.len() < order {
        return Err(Error::invalid("signal shorter than the filter order"));
    }
    let mut filter = match initial_weights {
        Some(w) if w.len() != order => {
            return Err(Error::invalid(
                "initial weights do not match the filter order",
            ))
        }
        Some(w) => FirFilter::with_weights(w.to_vec())?,
        None => FirFilter::new(order)?,
    };
    let (rec, converged, _) =
        drive::<T, _, _, ()>(&mut filter, x.as_slice(), d.as_slice(), cfg, |_, _, _| {
            Ok(None)
        })?;
    Ok(report_from(&filter, rec, converged))
}
