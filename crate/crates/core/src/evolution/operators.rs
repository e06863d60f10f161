//! Variation operators: weighted-mean crossover and scaled Gaussian mutation.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Encoding, EvolutionError, Individual};

/// Crossover weights are drawn uniformly from this interval.
pub const CROSSOVER_WEIGHT_RANGE: (f64, f64) = (0.8, 1.2);

/// Weighted-mean recombination with an explicit weight pair. The same pair
/// applies to every gene.
pub fn blend(
    a: &Individual,
    b: &Individual,
    w_a: f64,
    w_b: f64,
) -> Result<(Individual, Individual), EvolutionError> {
    if a.params.len() != b.params.len() {
        return Err(EvolutionError::LengthMismatch {
            expected: a.params.len(),
            got: b.params.len(),
        });
    }
    let total = w_a + w_b;
    let (first, second) = a
        .params
        .iter()
        .zip(&b.params)
        .map(|(&x, &y)| {
            let lo = x.min(y);
            let hi = x.max(y);
            (
                ((w_a * x + w_b * y) / total).clamp(lo, hi),
                ((w_b * x + w_a * y) / total).clamp(lo, hi),
            )
        })
        .unzip();
    Ok((Individual::new(first), Individual::new(second)))
}

pub fn crossover_pair<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    rng: &mut R,
) -> Result<(Individual, Individual), EvolutionError> {
    let (lo, hi) = CROSSOVER_WEIGHT_RANGE;
    let w_a = rng.random_range(lo..=hi);
    let w_b = rng.random_range(lo..=hi);
    blend(a, b, w_a, w_b)
}

/// Standard normal draw clipped to `[-1, 1]`.
pub fn bounded_gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let g: f64 = rng.sample(StandardNormal);
    g.clamp(-1.0, 1.0)
}

/// Adds `scale_k * grn * coeff / 100` to every gene, then clamps to the
/// gene's bounds. A zero coefficient returns an exact copy without touching
/// the RNG.
pub fn mutate<R: Rng + ?Sized>(
    ind: &Individual,
    encoding: &Encoding,
    coeff: f64,
    rng: &mut R,
) -> Individual {
    if coeff == 0.0 {
        return ind.clone();
    }
    let params = ind
        .params
        .iter()
        .zip(encoding.genes())
        .map(|(&v, gene)| {
            let delta = gene.scale * bounded_gaussian(rng) * coeff / 100.0;
            (v + delta).clamp(gene.min, gene.max)
        })
        .collect();
    Individual::new(params)
}

/// Initial population: the unmutated seed followed by `population_size - 1`
/// mutants of it.
pub fn init_population<R: Rng + ?Sized>(
    seed: &Individual,
    encoding: &Encoding,
    population_size: usize,
    initial_mutation_coefficient: f64,
    rng: &mut R,
) -> Vec<Individual> {
    let mut pop = Vec::with_capacity(population_size);
    pop.push(Individual::new(seed.params.clone()));
    while pop.len() < population_size {
        pop.push(mutate(seed, encoding, initial_mutation_coefficient, rng));
    }
    pop
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ind(v: &[f64]) -> Individual {
        Individual::new(v.to_vec())
    }

    #[test]
    fn blend_known_weights() {
        let (c1, c2) = blend(&ind(&[10.0]), &ind(&[20.0]), 1.2, 0.8).unwrap();
        assert!((c1.params[0] - 14.0).abs() < 1e-12);
        assert!((c2.params[0] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn blend_equal_weights_gives_midpoint() {
        let (c1, c2) = blend(&ind(&[0.0, 2.0, -1.0]), &ind(&[1.0, 4.0, 1.0]), 0.9, 0.9).unwrap();
        assert_eq!(c1.params, vec![0.5, 3.0, 0.0]);
        assert_eq!(c2.params, c1.params);
    }

    #[test]
    fn identical_parents_reproduce() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ind(&[0.3, -1.1, 2.7]);
        for _ in 0..50 {
            let (c1, c2) = crossover_pair(&a, &a, &mut rng).unwrap();
            assert_eq!(c1.params, a.params);
            assert_eq!(c2.params, a.params);
        }
    }

    #[test]
    fn crossover_length_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            crossover_pair(&ind(&[1.0]), &ind(&[1.0, 2.0]), &mut rng),
            Err(EvolutionError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grn_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..10_000).map(|_| bounded_gaussian(&mut rng)).collect();
        assert!(draws.iter().all(|g| g.abs() <= 1.0));
        assert!(draws.contains(&1.0) && draws.contains(&-1.0));
    }
}
