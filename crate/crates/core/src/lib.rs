//! Adaptive system identification: LMS for FIR and IIR models, spectral
//! analysis of the input, and an LMS/genetic hybrid that escapes stalled
//! adaptation.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar type.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod error;
pub mod evolution;
pub mod fir;
pub mod iir;
pub mod io;
pub mod rng;
pub mod scalar;
pub mod signals;
pub mod spectral;
pub mod sysid;

pub use adapt::{AdaptiveFilter, LmsRunConfig, Step};
pub use error::{Error, Result};
pub use evolution::{
    estimate_gt, ga_baseline_run, lms_ga_run, spawn_offsprings, Chromosome, GaConfig, LmsGaConfig,
    TriggerEvent,
};
pub use fir::{mu_stability_bound, run_fir_lms, FirFilter};
pub use iir::{max_pole_radius, poles, run_iir_lms, stabilize_poles, IirFilter, POLE_RADIUS_LIMIT};
pub use rng::RngStream;
pub use scalar::Real;
pub use signals::{
    color, four_level_symbol, gen_four_level, standard_lpf_8tap, FilterTaps, Signal,
};
pub use spectral::{
    autocorr_estimate, convergence_estimate, psd_from_autocorr, sym_eigenvalues,
    toeplitz_from_autocorr, wiener_solution, AutocorrSeq, ConvergenceEstimate, PsdCurve, SymMatrix,
    ToeplitzMatrix,
};
pub use sysid::{
    convergence_iterations, experiment_signals, mse_db, plant_response, run_experiment,
    theoretical_cost, CostKind, CurvePoint, ExperimentConfig, ExperimentReport, FilterCoefficients,
    Method, Plant, Structure,
};

pub type Signal64 = Signal<f64>;
pub type Signal32 = Signal<f32>;
pub type FilterTaps64 = FilterTaps<f64>;
pub type FirFilter64 = FirFilter<f64>;
pub type FirFilter32 = FirFilter<f32>;
pub type IirFilter64 = IirFilter<f64>;
pub type IirFilter32 = IirFilter<f32>;
pub type Plant64 = Plant<f64>;
pub type ExperimentReport64 = ExperimentReport<f64>;
pub type ExperimentReport32 = ExperimentReport<f32>;
pub type LmsRunConfig64 = LmsRunConfig<f64>;
pub type LmsGaConfig64 = LmsGaConfig<f64>;
pub type GaConfig64 = GaConfig<f64>;
