//! Real-coded genetic algorithm baseline over filter coefficients.
//!
//! Tournament selection, uniform arithmetic crossover, additive uniform mutation
//! and a single elite. Every chromosome is scored by its frozen MSE over the same
//! leading block of the record, so the elite's fitness never decreases.

use serde::{Deserialize, Serialize};

use super::Chromosome;
use crate::adapt::AdaptiveFilter;
use crate::error::{Error, Result};
use crate::fir::FirFilter;
use crate::iir::IirFilter;
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::signals::Signal;
use crate::sysid::{
    convergence_iterations, mse_db, CurvePoint, ExperimentReport, FilterCoefficients, GaParams,
    Structure,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig<T> {
    pub population_size: usize,
    pub generations: usize,
    /// Samples (from the start of the record) used to score each chromosome.
    pub eval_len: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub mutation_width: T,
    /// Initial genes are uniform in `[-init_range, init_range]`.
    pub init_range: T,
    pub threshold_db: T,
    pub hold: usize,
}

impl<T: Real> GaConfig<T> {
    pub fn from_params(p: &GaParams) -> Self {
        Self {
            population_size: p.population_size,
            generations: p.generations,
            eval_len: p.eval_len,
            tournament_size: p.tournament_size,
            crossover_rate: p.crossover_rate,
            mutation_rate: p.mutation_rate,
            mutation_width: T::c(p.mutation_width),
            init_range: T::c(p.init_range),
            threshold_db: T::c(-140.0),
            hold: 8,
        }
    }
}

impl<T: Real> Default for GaConfig<T> {
    fn default() -> Self {
        Self::from_params(&GaParams::default())
    }
}

#[derive(Clone)]
enum Prototype<T> {
    Fir(FirFilter<T>),
    Iir(IirFilter<T>),
}

impl<T: Real> Prototype<T> {
    fn new(structure: Structure) -> Result<Self> {
        Ok(match structure {
            Structure::Fir { order } => Prototype::Fir(FirFilter::new(order)?),
            Structure::Iir { m, l } => Prototype::Iir(IirFilter::new(m, l)),
        })
    }

    /// Scores `chrom`; IIR genes are replaced by their stabilized version.
    fn evaluate(&self, chrom: &mut Chromosome<T>, x: &[T], d: &[T]) -> Result<T> {
        let mse = match self {
            Prototype::Fir(f) => {
                let mut f = f.clone();
                f.set_genes(&chrom.genes)?;
                f.frozen_mse(x, d)?
            }
            Prototype::Iir(f) => {
                let mut f = f.clone();
                f.set_genes(&chrom.genes)?;
                chrom.genes = f.genes();
                f.frozen_mse(x, d)?
            }
        };
        // A blown-up candidate is simply the worst possible one.
        let mse = if mse.is_finite() { mse } else { T::max_value() };
        chrom.cached_mse = Some(mse);
        Ok(mse)
    }

    fn coefficients(&self, genes: &[T]) -> Result<FilterCoefficients<T>> {
        Ok(match self {
            Prototype::Fir(f) => {
                let mut f = f.clone();
                f.set_genes(genes)?;
                f.coefficients()
            }
            Prototype::Iir(f) => {
                let mut f = f.clone();
                f.set_genes(genes)?;
                f.coefficients()
            }
        })
    }
}

fn tournament<'a, T: Real>(
    pop: &'a [Chromosome<T>],
    size: usize,
    rng: &mut RngStream,
) -> &'a Chromosome<T> {
    let mut best = &pop[rng.index(pop.len())];
    for _ in 1..size.max(1) {
        let c = &pop[rng.index(pop.len())];
        if c.cached_mse < best.cached_mse {
            best = c;
        }
    }
    best
}

/// Plain GA identification. `seeds` are placed in the initial population as-is.
///
/// The report's curve has one point per generation (generation 0 is the initial
/// population) holding the minimum MSE in the population.
pub fn ga_baseline_run<T: Real>(
    x: &Signal<T>,
    d: &Signal<T>,
    structure: Structure,
    cfg: &GaConfig<T>,
    seeds: &[Vec<T>],
    rng: &mut RngStream,
) -> Result<ExperimentReport<T>> {
    if cfg.population_size < 2 {
        return Err(Error::invalid("population_size must be at least 2"));
    }
    if x.len() != d.len() {
        return Err(Error::invalid("input and desired signals differ in length"));
    }
    let genes = structure.gene_count();
    if seeds.iter().any(|s| s.len() != genes) {
        return Err(Error::invalid("seed chromosome has the wrong gene count"));
    }
    let eval_len = cfg.eval_len.min(x.len());
    if eval_len == 0 {
        return Err(Error::invalid("evaluation block is empty"));
    }
    let (ex, ed) = (&x.as_slice()[..eval_len], &d.as_slice()[..eval_len]);
    let proto = Prototype::new(structure)?;
    let range = cfg.init_range.to_f64_lossy();
    let width = cfg.mutation_width.to_f64_lossy();

    let mut pop: Vec<Chromosome<T>> = seeds
        .iter()
        .take(cfg.population_size)
        .map(|s| Chromosome::new(s.clone()))
        .collect();
    while pop.len() < cfg.population_size {
        pop.push(Chromosome::new(
            (0..genes)
                .map(|_| T::c(rng.uniform_range(-range, range)))
                .collect(),
        ));
    }

    let mut curve = Vec::with_capacity(cfg.generations + 1);
    let mut elite = pop[0].clone();
    for generation in 0..=cfg.generations {
        for c in pop.iter_mut() {
            if c.cached_mse.is_none() {
                proto.evaluate(c, ex, ed)?;
            }
        }
        let best = pop
            .iter()
            .min_by(|a, b| {
                a.cached_mse
                    .partial_cmp(&b.cached_mse)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("population is non-empty");
        elite = best.clone();
        let eps_min = elite.cached_mse.expect("evaluated");
        curve.push(CurvePoint {
            iteration: generation,
            eps_squared: eps_min,
            mse_db_window: mse_db(eps_min)?,
        });
        if generation == cfg.generations {
            break;
        }

        let mut next = Vec::with_capacity(cfg.population_size);
        next.push(elite.clone());
        while next.len() < cfg.population_size {
            let p1 = tournament(&pop, cfg.tournament_size, rng);
            let p2 = tournament(&pop, cfg.tournament_size, rng);
            let mut child = if rng.uniform() < cfg.crossover_rate {
                Chromosome::new(
                    p1.genes
                        .iter()
                        .zip(&p2.genes)
                        .map(|(&a, &b)| {
                            let w = T::c(rng.uniform());
                            w * a + (T::one() - w) * b
                        })
                        .collect(),
                )
            } else {
                Chromosome::new(p1.genes.clone())
            };
            for g in child.genes.iter_mut() {
                if rng.uniform() < cfg.mutation_rate {
                    *g = *g + T::c(rng.uniform_range(-width, width));
                }
            }
            next.push(child);
        }
        pop = next;
    }

    let db: Vec<T> = curve.iter().map(|p| p.mse_db_window).collect();
    Ok(ExperimentReport {
        converged_at: convergence_iterations(&db, cfg.threshold_db, cfg.hold),
        final_mse_db: curve.last().map(|p| p.mse_db_window),
        curve,
        final_weights: proto.coefficients(&elite.genes)?,
        trigger_events: Vec::new(),
        seed: None,
        config: None,
    })
}
