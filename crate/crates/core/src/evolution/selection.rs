//! Parent selection into the mating pool and elitist survivor selection.
//!
//! All parent selectors sample with replacement and return population
//! indices.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvolutionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    /// Fitness-proportional sampling.
    #[default]
    Roulette,
    /// Linear ranking, worst weight 0.5, best 1.5.
    Rank,
    /// Stochastic universal sampling: one spin, equally spaced pointers.
    Sus,
    /// Binary tournament; the fitter contestant wins with the configured
    /// probability.
    Tournament,
}

/// Selection pressure of linear ranking.
pub const RANK_PRESSURE: f64 = 1.5;

pub fn select_parents<R: Rng + ?Sized>(
    fitnesses: &[f64],
    method: SelectionMethod,
    parent_selection_probability: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>, EvolutionError> {
    if fitnesses.is_empty() {
        return Err(EvolutionError::EmptyPopulation);
    }
    if fitnesses.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(EvolutionError::InvalidFitness);
    }
    Ok(match method {
        SelectionMethod::Roulette => roulette(fitnesses, count, rng)?,
        SelectionMethod::Rank => roulette(&rank_weights(fitnesses), count, rng)?,
        SelectionMethod::Sus => stochastic_universal(fitnesses, count, rng)?,
        SelectionMethod::Tournament => (0..count)
            .map(|_| tournament(fitnesses, parent_selection_probability, rng))
            .collect(),
    })
}

fn cumulative(weights: &[f64]) -> Result<Vec<f64>, EvolutionError> {
    let cum: Vec<f64> = weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    match cum.last() {
        Some(&total) if total.is_finite() && total > 0.0 => Ok(cum),
        _ => Err(EvolutionError::InvalidFitness),
    }
}

/// First bucket whose cumulative weight exceeds `pointer`.
fn bucket(cum: &[f64], pointer: f64) -> usize {
    cum.partition_point(|&c| c <= pointer).min(cum.len() - 1)
}

fn roulette<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>, EvolutionError> {
    let cum = cumulative(weights)?;
    let total = cum[cum.len() - 1];
    Ok((0..count)
        .map(|_| bucket(&cum, rng.random::<f64>() * total))
        .collect())
}

fn stochastic_universal<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>, EvolutionError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let cum = cumulative(weights)?;
    let spacing = cum[cum.len() - 1] / count as f64;
    let start = rng.random::<f64>() * spacing;
    Ok((0..count)
        .map(|i| bucket(&cum, start + i as f64 * spacing))
        .collect())
}

/// Linear ranking weights, in population order.
pub fn rank_weights(fitnesses: &[f64]) -> Vec<f64> {
    let n = fitnesses.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]));
    let mut weights = vec![1.0; n];
    if n > 1 {
        for (rank, &i) in order.iter().enumerate() {
            let t = rank as f64 / (n - 1) as f64;
            weights[i] = (2.0 - RANK_PRESSURE) + 2.0 * (RANK_PRESSURE - 1.0) * t;
        }
    }
    weights
}

fn tournament<R: Rng + ?Sized>(fitnesses: &[f64], p_fitter: f64, rng: &mut R) -> usize {
    let n = fitnesses.len();
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    let (better, worse) = match fitnesses[a].total_cmp(&fitnesses[b]) {
        Ordering::Greater => (a, b),
        Ordering::Less => (b, a),
        Ordering::Equal => (a.min(b), a.max(b)),
    };
    if rng.random::<f64>() < p_fitter {
        better
    } else {
        worse
    }
}

/// Indices of the `n` fittest individuals, best first. Ties keep the lower
/// index first.
pub fn survivor_select(fitnesses: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitnesses.len()).collect();
    order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]));
    order.truncate(n);
    order
}
