//! Genetic optimization of trajectory-plan parameters.
//!
//! An individual is the flat vector `[acceleration, body_dir, ball_dir]` of
//! every node, in node order. Node positions never evolve. One generation:
//!
//! 1. parents are drawn into a mating pool by the configured selector;
//! 2. shuffled pool pairs are recombined with probability
//!    `crossover_probability`, otherwise copied;
//! 3. every offspring is mutated with `mutation_coefficient`;
//! 4. parents and offspring compete and the best `population_size` survive.
//!
//! Survivors are chosen deterministically by fitness, so the best fitness of
//! the population never decreases.

mod fitness;
mod operators;
mod selection;

use std::f64::consts::PI;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fitness::{
    bearing_to_obstacle, clearance_heading, coeff_alpha_beta, desired, node_fitness, plan_fitness,
    FitnessConfig, NodeContext,
};
pub use operators::{
    blend, bounded_gaussian, crossover_pair, init_population, mutate, CROSSOVER_WEIGHT_RANGE,
};
pub use selection::{
    rank_weights, select_parents, survivor_select, SelectionMethod, RANK_PRESSURE,
};

use crate::geometry::Point2;
use crate::plan::{NodeParams, Param, PlanError, PlanLimits, TrajectoryPlan};

/// Mutation scale of the angular genes: half a turn.
pub const ANGLE_SCALE: f64 = PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parameter vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("population is empty")]
    EmptyPopulation,
    #[error("fitness values must be finite, non-negative and not all zero")]
    InvalidFitness,
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generation_count: usize,
    pub crossover_probability: f64,
    pub parent_selection_probability: f64,
    pub selection_method: SelectionMethod,
    pub mutation_coefficient: f64,
    pub initial_mutation_coefficient: f64,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 40,
            generation_count: 1000,
            crossover_probability: 0.8,
            parent_selection_probability: 0.6,
            selection_method: SelectionMethod::Roulette,
            mutation_coefficient: 4.0,
            initial_mutation_coefficient: 4.0,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let invalid = |msg: &str| Err(EvolutionError::InvalidConfig(msg.to_string()));
        if self.population_size < 2 {
            return invalid("population_size must be at least 2");
        }
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.crossover_probability) || !unit(self.parent_selection_probability) {
            return invalid("probabilities must lie in [0, 1]");
        }
        let coeff = |c: f64| c.is_finite() && c >= 0.0;
        if !coeff(self.mutation_coefficient) || !coeff(self.initial_mutation_coefficient) {
            return invalid("mutation coefficients must be finite and >= 0");
        }
        Ok(())
    }

    /// Size of the mating pool. Tournament selection refills the whole
    /// population; the other selectors copy `parent_selection_probability`
    /// of it (at least two).
    pub fn mating_pool_size(&self) -> usize {
        match self.selection_method {
            SelectionMethod::Tournament => self.population_size,
            _ => ((self.parent_selection_probability * self.population_size as f64).ceil()
                as usize)
                .max(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub params: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(params: Vec<f64>) -> Self {
        Self {
            params,
            fitness: None,
        }
    }
}

/// Bounds and mutation scale of one gene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneBounds {
    pub min: f64,
    pub max: f64,
    pub scale: f64,
}

/// Maps a plan to and from the flat gene vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    layout: Vec<Point2>,
    genes: Vec<GeneBounds>,
}

impl Encoding {
    pub fn new(layout: Vec<Point2>, limits: &PlanLimits) -> Self {
        let per_node: [GeneBounds; 3] = Param::ALL.map(|param| {
            let [min, max] = limits.range(param);
            let scale = match param {
                Param::Acceleration => limits.max_acceleration,
                Param::BodyDir | Param::BallDir => ANGLE_SCALE,
            };
            GeneBounds { min, max, scale }
        });
        let genes = (0..layout.len()).flat_map(|_| per_node).collect();
        Self { layout, genes }
    }

    pub fn for_plan(plan: &TrajectoryPlan) -> Self {
        Self::new(plan.positions(), plan.limits())
    }

    pub fn layout(&self) -> &[Point2] {
        &self.layout
    }

    pub fn genes(&self) -> &[GeneBounds] {
        &self.genes
    }

    pub fn encode(plan: &TrajectoryPlan) -> Individual {
        Individual::new(
            plan.nodes()
                .iter()
                .flat_map(|n| n.params.to_array())
                .collect(),
        )
    }

    pub fn decode(&self, ind: &Individual) -> Result<Vec<NodeParams>, EvolutionError> {
        if ind.params.len() != self.genes.len() {
            return Err(EvolutionError::LengthMismatch {
                expected: self.genes.len(),
                got: ind.params.len(),
            });
        }
        Ok(ind
            .params
            .chunks_exact(3)
            .map(|c| NodeParams::new(c[0], c[1], c[2]))
            .collect())
    }

    pub fn within_bounds(&self, ind: &Individual) -> bool {
        ind.params.len() == self.genes.len()
            && ind
                .params
                .iter()
                .zip(&self.genes)
                .all(|(&v, g)| v >= g.min && v <= g.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
}

impl GenerationStats {
    fn of(generation: usize, fitnesses: &[f64]) -> Self {
        let best = fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = fitnesses.iter().sum::<f64>() / fitnesses.len() as f64;
        Self {
            generation,
            best,
            mean,
            worst,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub best_plan: TrajectoryPlan,
    pub best_fitness: f64,
    pub seed_fitness: f64,
    /// One entry per completed generation, starting with the initial
    /// population.
    pub history: Vec<GenerationStats>,
    pub rng_seed: u64,
    pub cancelled: bool,
}

fn evaluate(
    pop: &mut [Individual],
    layout: &[Point2],
    fit: &FitnessConfig,
) -> Result<(), EvolutionError> {
    pop.par_iter_mut().try_for_each(|ind| {
        if ind.fitness.is_none() {
            ind.fitness = Some(plan_fitness(&ind.params, layout, fit)?);
        }
        Ok(())
    })
}

fn fitnesses(pop: &[Individual]) -> Vec<f64> {
    pop.iter()
        .map(|i| i.fitness.expect("population evaluated"))
        .collect()
}

pub fn evolve(
    seed_plan: &TrajectoryPlan,
    ga: &GaConfig,
    fit: &FitnessConfig,
) -> Result<EvolutionResult, EvolutionError> {
    evolve_with(seed_plan, ga, fit, |_| ControlFlow::Continue(()))
}

/// Runs the optimizer, reporting every generation (including the initial
/// population) to `observer`. Returning `Break` stops the run after the
/// reported generation; the partial result is returned with `cancelled` set.
pub fn evolve_with<F>(
    seed_plan: &TrajectoryPlan,
    ga: &GaConfig,
    fit: &FitnessConfig,
    mut observer: F,
) -> Result<EvolutionResult, EvolutionError>
where
    F: FnMut(&GenerationStats) -> ControlFlow<()>,
{
    ga.validate()?;
    fit.validate()?;
    let encoding = Encoding::for_plan(seed_plan);
    let layout = encoding.layout().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(ga.rng_seed);

    let seed = Encoding::encode(seed_plan);
    let seed_fitness = plan_fitness(&seed.params, &layout, fit)?;
    let mut pop = init_population(
        &seed,
        &encoding,
        ga.population_size,
        ga.initial_mutation_coefficient,
        &mut rng,
    );
    evaluate(&mut pop, &layout, fit)?;
    let order = survivor_select(&fitnesses(&pop), pop.len());
    pop = order.into_iter().map(|i| pop[i].clone()).collect();

    let mut history = vec![GenerationStats::of(0, &fitnesses(&pop))];
    let mut cancelled = observer(&history[0]).is_break();

    let pool_size = ga.mating_pool_size();
    for generation in 1..=ga.generation_count {
        if cancelled {
            break;
        }
        let fit_values = fitnesses(&pop);
        let mut pool = select_parents(
            &fit_values,
            ga.selection_method,
            ga.parent_selection_probability,
            pool_size,
            &mut rng,
        )?;
        pool.shuffle(&mut rng);

        let mut offspring = Vec::with_capacity(pool.len());
        for pair in pool.chunks(2) {
            match *pair {
                [a, b] => {
                    let (c1, c2) = if rng.random::<f64>() < ga.crossover_probability {
                        crossover_pair(&pop[a], &pop[b], &mut rng)?
                    } else {
                        (pop[a].clone(), pop[b].clone())
                    };
                    offspring.push(c1);
                    offspring.push(c2);
                }
                [a] => offspring.push(pop[a].clone()),
                _ => unreachable!(),
            }
        }
        for child in &mut offspring {
            *child = mutate(child, &encoding, ga.mutation_coefficient, &mut rng);
        }
        evaluate(&mut offspring, &layout, fit)?;

        pop.extend(offspring);
        let order = survivor_select(&fitnesses(&pop), ga.population_size);
        pop = order.into_iter().map(|i| pop[i].clone()).collect();

        let stats = GenerationStats::of(generation, &fitnesses(&pop));
        history.push(stats);
        cancelled = observer(&stats).is_break();
    }

    let best = &pop[0];
    let best_plan = seed_plan.with_params(&encoding.decode(best)?)?;
    Ok(EvolutionResult {
        best_plan,
        best_fitness: best.fitness.expect("population evaluated"),
        seed_fitness,
        history,
        rng_seed: ga.rng_seed,
        cancelled,
    })
}
