//! Reference plants, metrics and experiment orchestration.

use serde::{Deserialize, Serialize};

use crate::adapt::LmsRunConfig;
use crate::error::{Error, Result};
use crate::evolution::{
    estimate_gt, ga_baseline_run, lms_ga_run, GaConfig, LmsGaConfig, TriggerEvent,
};
use crate::fir::run_fir_lms;
use crate::iir::{max_pole_radius, run_iir_lms, IirFilter};
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::signals::{color, gen_four_level, standard_lpf_8tap, FilterTaps, Signal};

/// Floor reported for an exactly zero MSE.
pub const MSE_DB_FLOOR: f64 = -400.0;

/// `10 log10(mse)`, with zero mapped to [`MSE_DB_FLOOR`].
pub fn mse_db<T: Real>(mse: T) -> Result<T> {
    if mse < T::zero() || mse.is_nan() {
        return Err(Error::invalid("MSE must be non-negative"));
    }
    if mse == T::zero() {
        return Ok(T::c(MSE_DB_FLOOR));
    }
    Ok((T::c(10.0) * mse.log10()).max(T::c(MSE_DB_FLOOR)))
}

/// First index whose value is `<= threshold_db` and stays there for the next
/// `hold` points.
pub fn convergence_iterations<T: Real>(
    curve_db: &[T],
    threshold_db: T,
    hold: usize,
) -> Option<usize> {
    let mut start = None;
    for (i, &v) in curve_db.iter().enumerate() {
        if v <= threshold_db {
            let s = *start.get_or_insert(i);
            if i - s >= hold {
                return Some(s);
            }
        } else {
            start = None;
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    FirWhite,
    Iir,
    FirColored,
}

/// Multiplications per iteration for the three LMS configurations.
pub fn theoretical_cost(kind: CostKind, n: usize, m: usize, l: usize, p: usize) -> usize {
    match kind {
        CostKind::FirWhite => 2 * n,
        CostKind::Iir => (m + l) * (l + 2),
        CostKind::FirColored => n * p + 2 * n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    Fir,
    Iir,
}

/// Unknown system `H(z) = sum b_k z^-k / (1 - sum a_k z^-k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plant<T> {
    pub kind: PlantKind,
    pub b: Vec<T>,
    pub a: Vec<T>,
}

impl<T: Real> Plant<T> {
    pub fn fir(b: Vec<T>) -> Self {
        Self {
            kind: PlantKind::Fir,
            b,
            a: Vec::new(),
        }
    }

    pub fn iir(b: Vec<T>, a: Vec<T>) -> Self {
        Self {
            kind: PlantKind::Iir,
            b,
            a,
        }
    }

    /// `0.03 + 0.24 z^-1 + 0.54 z^-2 + 0.8 z^-3`
    pub fn eq31() -> Self {
        Self::fir([0.03, 0.24, 0.54, 0.8].iter().map(|&v| T::c(v)).collect())
    }

    /// `0.6 / (1 - 0.2 z^-1)`
    pub fn eq32() -> Self {
        Self::iir(vec![T::c(0.6)], vec![T::c(0.2)])
    }

    /// Second-order plant whose best first-order IIR model has a bimodal error
    /// surface: `(0.05 - 0.4 z^-1) / (1 - 1.1314 z^-1 + 0.25 z^-2)`.
    pub fn bimodal_second_order() -> Self {
        Self::iir(
            vec![T::c(0.05), T::c(-0.4)],
            vec![T::c(1.1314), T::c(-0.25)],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.is_empty() {
            return Err(Error::InvalidPlant("numerator is empty".into()));
        }
        if self.b.iter().chain(&self.a).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPlant("coefficients must be finite".into()));
        }
        if self.kind == PlantKind::Fir && !self.a.is_empty() {
            return Err(Error::InvalidPlant(
                "FIR plant with feedback coefficients".into(),
            ));
        }
        if max_pole_radius(&self.a) >= T::one() {
            return Err(Error::InvalidPlant(
                "plant has a pole on or outside the unit circle".into(),
            ));
        }
        Ok(())
    }
}

/// Noiseless plant output for input `x`, starting at rest.
pub fn plant_response<T: Real>(p: &Plant<T>, x: &Signal<T>) -> Result<Signal<T>> {
    p.validate()?;
    let mut f = IirFilter::from_raw(p.b.clone(), p.a.clone());
    let out = x
        .as_slice()
        .iter()
        .map(|&v| f.iir_output(v))
        .collect::<Result<Vec<T>>>()?;
    Signal::new(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCoefficients<T> {
    pub b: Vec<T>,
    pub a: Vec<T>,
}

impl<T: Real> FilterCoefficients<T> {
    pub fn genes(&self) -> Vec<T> {
        self.b.iter().chain(&self.a).copied().collect()
    }
}

/// Adaptive filter shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Fir { order: usize },
    Iir { m: usize, l: usize },
}

impl Structure {
    pub fn gene_count(&self) -> usize {
        match *self {
            Structure::Fir { order } => order,
            Structure::Iir { m, l } => m + 1 + l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint<T> {
    pub iteration: usize,
    pub eps_squared: T,
    pub mse_db_window: T,
}

/// Outcome of one identification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport<T> {
    pub curve: Vec<CurvePoint<T>>,
    pub converged_at: Option<usize>,
    pub final_weights: FilterCoefficients<T>,
    /// Windowed MSE at the last iteration; `None` when no iteration ran.
    pub final_mse_db: Option<T>,
    pub trigger_events: Vec<TriggerEvent<T>>,
    pub seed: Option<u64>,
    pub config: Option<ExperimentConfig>,
}

impl<T: Real> ExperimentReport<T> {
    pub fn mse_db_series(&self) -> Vec<T> {
        self.curve.iter().map(|p| p.mse_db_window).collect()
    }

    pub fn trigger_count(&self) -> usize {
        self.trigger_events.iter().filter(|e| e.triggered).count()
    }

    pub fn trigger_iterations(&self) -> Vec<usize> {
        self.trigger_events
            .iter()
            .filter(|e| e.triggered)
            .map(|e| e.iteration)
            .collect()
    }

    /// JSON document shape; the curve itself lives in `curve_file`.
    pub fn to_document(&self, curve_file: &str) -> ReportDocument<T> {
        ReportDocument {
            config: self.config.clone(),
            seed: self.seed,
            converged_at: self.converged_at,
            final_weights: self.final_weights.clone(),
            final_mse_db: self.final_mse_db,
            trigger_events: self.trigger_events.clone(),
            curve_file: curve_file.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument<T> {
    pub config: Option<ExperimentConfig>,
    pub seed: Option<u64>,
    pub converged_at: Option<usize>,
    pub final_weights: FilterCoefficients<T>,
    pub final_mse_db: Option<T>,
    pub trigger_events: Vec<TriggerEvent<T>>,
    pub curve_file: String,
}

// ---------------------------------------------------------------------------
// Experiment configuration (external schema).

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LmsFir,
    LmsIir,
    LmsGa,
    Ga,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    pub b: Vec<f64>,
    #[serde(default)]
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    FourLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedLpf {
    Standard8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LpfSpec {
    Named(NamedLpf),
    Custom(Vec<f64>),
}

impl Default for LpfSpec {
    fn default() -> Self {
        LpfSpec::Named(NamedLpf::Standard8)
    }
}

impl LpfSpec {
    pub fn taps<T: Real>(&self) -> Result<FilterTaps<T>> {
        match self {
            LpfSpec::Named(NamedLpf::Standard8) => Ok(standard_lpf_8tap()),
            LpfSpec::Custom(v) => FilterTaps::new(v.iter().map(|&h| T::c(h)).collect()),
        }
    }
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub kind: InputKind,
    #[serde(default)]
    pub colored: bool,
    #[serde(default)]
    pub lpf: LpfSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Standard deviation of additive uniform noise on the desired signal.
    #[serde(default)]
    pub noise_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orders {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
}

impl Orders {
    pub fn structure(&self) -> Result<Structure> {
        match (self.n, self.m, self.l) {
            (Some(order), None, None) if order >= 1 => Ok(Structure::Fir { order }),
            (None, Some(m), Some(l)) => Ok(Structure::Iir { m, l }),
            _ => Err(Error::Config(
                "orders must be either {\"n\": N >= 1} or {\"m\": M, \"l\": L}".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GtSpec {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmsGaParams {
    pub m: usize,
    pub d: f64,
    pub gamma: usize,
    pub gt: GtSpec,
    pub t_e: usize,
}

fn default_population() -> usize {
    40
}
fn default_generations() -> usize {
    200
}
fn default_eval_len() -> usize {
    256
}
fn default_tournament() -> usize {
    2
}
fn default_crossover() -> f64 {
    0.9
}
fn default_mutation_rate() -> f64 {
    0.1
}
fn default_mutation_width() -> f64 {
    0.02
}
fn default_init_range() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaParams {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_eval_len")]
    pub eval_len: usize,
    #[serde(default = "default_tournament")]
    pub tournament_size: usize,
    #[serde(default = "default_crossover")]
    pub crossover_rate: f64,
    #[serde(default = "default_mutation_rate")]
    pub mutation_rate: f64,
    #[serde(default = "default_mutation_width")]
    pub mutation_width: f64,
    #[serde(default = "default_init_range")]
    pub init_range: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: default_population(),
            generations: default_generations(),
            eval_len: default_eval_len(),
            tournament_size: default_tournament(),
            crossover_rate: default_crossover(),
            mutation_rate: default_mutation_rate(),
            mutation_width: default_mutation_width(),
            init_range: default_init_range(),
        }
    }
}

fn default_max_iterations() -> usize {
    10_000
}
fn default_threshold_db() -> f64 {
    -140.0
}
fn default_hold() -> usize {
    8
}
fn default_mse_window() -> usize {
    8
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_threshold_db")]
    pub threshold_db: f64,
    #[serde(default = "default_hold")]
    pub hold: usize,
    #[serde(default = "default_mse_window")]
    pub mse_window: usize,
    #[serde(default = "default_true")]
    pub stop_on_convergence: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            threshold_db: default_threshold_db(),
            hold: default_hold(),
            mse_window: default_mse_window(),
            stop_on_convergence: true,
        }
    }
}

/// Full description of one experiment, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub plant: PlantSpec,
    pub input: InputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub orders: Orders,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lms_ga: Option<LmsGaParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ga: Option<GaParams>,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<PlantSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn structure(&self) -> Result<Structure> {
        self.orders.structure()
    }

    pub fn plant<T: Real>(&self) -> Plant<T> {
        let b = self.plant.b.iter().map(|&v| T::c(v)).collect();
        let a: Vec<T> = self.plant.a.iter().map(|&v| T::c(v)).collect();
        if a.is_empty() {
            Plant::fir(b)
        } else {
            Plant::iir(b, a)
        }
    }

    pub fn run_config<T: Real>(&self) -> LmsRunConfig<T> {
        LmsRunConfig {
            mu: T::c(self.mu.unwrap_or(0.0)),
            max_iterations: self.run.max_iterations,
            convergence_threshold_db: T::c(self.run.threshold_db),
            hold: self.run.hold,
            mse_window: self.run.mse_window,
            stop_on_convergence: self.run.stop_on_convergence,
        }
    }

    /// Checks that every field the chosen method needs is present and consistent.
    pub fn validate(&self) -> Result<()> {
        let structure = self.structure()?;
        match (self.method, structure) {
            (Method::LmsFir, Structure::Iir { .. }) => {
                return Err(Error::Config("method lms_fir needs orders.n".into()))
            }
            (Method::LmsIir, Structure::Fir { .. }) => {
                return Err(Error::Config(
                    "method lms_iir needs orders.m and orders.l".into(),
                ))
            }
            (_, Structure::Iir { m, l }) if m + l == 0 => {
                return Err(Error::Config("IIR orders need M + L >= 1".into()))
            }
            _ => {}
        }
        if self.method != Method::Ga {
            match self.mu {
                Some(mu) if mu.is_finite() && mu >= 0.0 => {}
                Some(_) => return Err(Error::Config("mu must be finite and non-negative".into())),
                None => return Err(Error::Config("missing field `mu`".into())),
            }
        }
        if self.method == Method::LmsGa {
            let p = self
                .lms_ga
                .as_ref()
                .ok_or_else(|| Error::Config("method lms_ga needs the `lms_ga` block".into()))?;
            if p.m == 0 || p.gamma == 0 || p.t_e == 0 || !(p.d >= 0.0) {
                return Err(Error::Config(
                    "lms_ga needs m >= 1, d >= 0, gamma >= 1, t_e >= 1".into(),
                ));
            }
        }
        if let Some(g) = &self.ga {
            if g.population_size < 2 {
                return Err(Error::Config(
                    "ga.population_size must be at least 2".into(),
                ));
            }
        }
        if self.input.samples == 0 {
            return Err(Error::Config("input.samples must be positive".into()));
        }
        if !(self.input.noise_std >= 0.0) {
            return Err(Error::Config("input.noise_std must be non-negative".into()));
        }
        if self.run.hold == 0 || self.run.mse_window == 0 {
            return Err(Error::Config(
                "run.hold and run.mse_window must be at least 1".into(),
            ));
        }
        if let Some(init) = &self.initial {
            let (nb, na) = match structure {
                Structure::Fir { order } => (order, 0),
                Structure::Iir { m, l } => (m + 1, l),
            };
            if init.b.len() != nb || init.a.len() != na {
                return Err(Error::Config(
                    "initial coefficients do not match orders".into(),
                ));
            }
        }
        self.plant::<f64>()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.input
            .lpf
            .taps::<f64>()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Input and desired signals for an experiment.
pub fn experiment_signals<T: Real>(cfg: &ExperimentConfig) -> Result<(Signal<T>, Signal<T>)> {
    let root = RngStream::new(cfg.seed);
    let mut input_rng = root.split(0);
    let raw = gen_four_level::<T>(cfg.input.samples, &mut input_rng);
    let x = if cfg.input.colored {
        color(&raw, &cfg.input.lpf.taps()?)?
    } else {
        raw
    };
    let mut d = plant_response(&cfg.plant(), &x)?;
    if cfg.input.noise_std > 0.0 {
        let mut noise_rng = root.split(2);
        let half_width = cfg.input.noise_std * 3f64.sqrt();
        let noisy = d
            .as_slice()
            .iter()
            .map(|&v| v + T::c(noise_rng.uniform_range(-half_width, half_width)))
            .collect();
        d = Signal::new(noisy)?;
    }
    Ok((x, d))
}

/// Generates the signals, runs the configured learner and returns its report.
pub fn run_experiment<T: Real>(cfg: &ExperimentConfig) -> Result<ExperimentReport<T>> {
    cfg.validate()?;
    let structure = cfg.structure()?;
    let (x, d) = experiment_signals::<T>(cfg)?;
    let run_cfg = cfg.run_config::<T>();
    let initial = cfg.initial.as_ref().map(|p| FilterCoefficients {
        b: p.b.iter().map(|&v| T::c(v)).collect(),
        a: p.a.iter().map(|&v| T::c(v)).collect(),
    });
    let search_rng = RngStream::new(cfg.seed).split(1);

    let mut report = match cfg.method {
        Method::LmsFir | Method::LmsIir => pure_lms(&x, &d, structure, &run_cfg, initial.as_ref())?,
        Method::LmsGa => {
            let p = cfg.lms_ga.as_ref().expect("validated");
            let gradient_threshold = match p.gt {
                GtSpec::Value(v) => T::c(v),
                GtSpec::Auto(_) => {
                    let mut probe = run_cfg.clone();
                    probe.stop_on_convergence = false;
                    let pure = pure_lms(&x, &d, structure, &probe, initial.as_ref())?;
                    estimate_gt(&pure.mse_db_series(), p.gamma)?.0
                }
            };
            let ga_cfg = LmsGaConfig {
                m: p.m,
                offset_d: T::c(p.d),
                gamma: p.gamma,
                gradient_threshold,
                t_e: p.t_e,
            };
            let mut rng = search_rng;
            lms_ga_run(
                &x,
                &d,
                structure,
                initial.as_ref(),
                &ga_cfg,
                &run_cfg,
                &mut rng,
            )?
        }
        Method::Ga => {
            let params = cfg.ga.clone().unwrap_or_default();
            let ga_cfg = GaConfig::from_params(&params);
            let mut rng = search_rng;
            let seeds: Vec<Vec<T>> = initial.iter().map(|c| c.genes()).collect();
            ga_baseline_run(&x, &d, structure, &ga_cfg, &seeds, &mut rng)?
        }
    };
    report.seed = Some(cfg.seed);
    report.config = Some(cfg.clone());
    Ok(report)
}

pub(crate) fn pure_lms<T: Real>(
    x: &Signal<T>,
    d: &Signal<T>,
    structure: Structure,
    cfg: &LmsRunConfig<T>,
    initial: Option<&FilterCoefficients<T>>,
) -> Result<ExperimentReport<T>> {
    match structure {
        Structure::Fir { order } => {
            let init = initial.map(|c| c.b.clone());
            run_fir_lms(x, d, order, cfg, init.as_deref())
        }
        Structure::Iir { m, l } => run_iir_lms(x, d, m, l, cfg, initial),
    }
}
