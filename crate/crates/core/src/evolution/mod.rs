//! Genetic search over filter coefficients and the hybrid LMS-GA learner.

mod ga;
mod hybrid;

pub use ga::{ga_baseline_run, GaConfig};
pub use hybrid::{lms_ga_run, LmsGaConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Width (dB) of the band a learning curve must stay inside to count as a plateau.
pub const PLATEAU_BAND_DB: f64 = 10.0;

/// A plateau must last at least this many `delta` windows.
pub const PLATEAU_MIN_WINDOWS: usize = 5;

/// Candidate coefficient vector, `[b_0..b_M, a_1..a_L]` or FIR weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome<T> {
    pub genes: Vec<T>,
    pub cached_mse: Option<T>,
}

impl<T: Real> Chromosome<T> {
    pub fn new(genes: Vec<T>) -> Self {
        Self {
            genes,
            cached_mse: None,
        }
    }

    pub fn fitness(&self) -> Option<T> {
        self.cached_mse.and_then(|f| fitness(f).ok())
    }
}

/// One gradient check of the hybrid controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerEvent<T> {
    pub iteration: usize,
    pub delta_e: T,
    pub triggered: bool,
    pub best_candidate_mse_db: Option<T>,
}

/// Mean of the last `t_e` squared errors.
pub fn windowed_mse<T: Real>(errors: &[T], t_e: usize) -> Result<T> {
    if t_e == 0 {
        return Err(Error::invalid("t_e must be at least 1"));
    }
    if errors.len() < t_e {
        return Err(Error::invalid(format!(
            "window holds {} errors, need {t_e}",
            errors.len()
        )));
    }
    let tail = &errors[errors.len() - t_e..];
    Ok(tail.iter().map(|&e| e * e).sum::<T>() / T::from_usize_lossy(t_e))
}

/// `F = 1 / (1 + f)` for a non-negative cost `f`.
pub fn fitness<T: Real>(cost: T) -> Result<T> {
    if !(cost >= T::zero()) {
        return Err(Error::invalid("cost must be non-negative"));
    }
    Ok(T::one() / (T::one() + cost))
}

/// `genes_i + sigma_i * offset_d` for each gene.
pub fn perturb<T: Real>(parent: &Chromosome<T>, sigmas: &[T], offset_d: T) -> Chromosome<T> {
    debug_assert_eq!(parent.genes.len(), sigmas.len());
    Chromosome::new(
        parent
            .genes
            .iter()
            .zip(sigmas)
            .map(|(&g, &s)| g + s * offset_d)
            .collect(),
    )
}

/// `m` offsprings of `parent`, each gene moved by `sigma * offset_d` with
/// `sigma` uniform in `[-1, 1]`, drawn independently per gene and offspring.
///
/// Each offspring draws from its own child stream of a base seed taken from
/// `rng`, so the result does not depend on evaluation order.
pub fn spawn_offsprings<T: Real>(
    parent: &Chromosome<T>,
    m: usize,
    offset_d: T,
    rng: &mut RngStream,
) -> Vec<Chromosome<T>> {
    let base = RngStream::new(rng.next_u64());
    (0..m)
        .map(|i| {
            let mut stream = base.split(i as u64);
            let sigmas: Vec<T> = parent
                .genes
                .iter()
                .map(|_| T::c(stream.uniform_range(-1.0, 1.0)))
                .collect();
            perturb(parent, &sigmas, offset_d)
        })
        .collect()
}

/// Gradient threshold from a pure-LMS learning curve (in dB).
///
/// The plateau starts at the first iteration after which the curve stays inside a
/// band of [`PLATEAU_BAND_DB`]; it must last at least `PLATEAU_MIN_WINDOWS * delta`
/// iterations. Returns `((max - min) / delta, plateau_start)`.
pub fn estimate_gt<T: Real>(curve_db: &[T], delta: usize) -> Result<(T, usize)> {
    if delta == 0 {
        return Err(Error::invalid("delta must be at least 1"));
    }
    if curve_db.is_empty() {
        return Err(Error::invalid("learning curve is empty"));
    }
    let band = T::c(PLATEAU_BAND_DB);
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut start = curve_db.len();
    let (mut plateau_lo, mut plateau_hi) = (lo, hi);
    for i in (0..curve_db.len()).rev() {
        let v = curve_db[i];
        if !v.is_finite() {
            break;
        }
        lo = lo.min(v);
        hi = hi.max(v);
        if hi - lo > band {
            break;
        }
        start = i;
        plateau_lo = lo;
        plateau_hi = hi;
    }
    if curve_db.len() - start < PLATEAU_MIN_WINDOWS * delta {
        return Err(Error::NoPlateau);
    }
    Ok((
        (plateau_hi - plateau_lo) / T::from_usize_lossy(delta),
        start,
    ))
}
