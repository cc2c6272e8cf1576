use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gp::config::GpConfig;
use crate::gp::eval::{check_features, evaluate, Columns, Evaluator, Fitness};
use crate::gp::operators::{
    hoist_mutation, point_mutation, random_program, subtree_crossover, subtree_mutation, tournament_index,
};
use crate::gp::program::Program;
use crate::matrix::Matrix;
use crate::seed::rng_from_seed;

/// A fitted symbolic regressor: the best program of an evolutionary run.
#[derive(Clone, Debug, PartialEq)]
pub struct GpRegressor {
    pub program: Program,
    pub config: GpConfig,
    /// Training MAE of `program`.
    pub fitness: f64,
}

impl GpRegressor {
    pub fn fit(config: &GpConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        evolve(config, x, y)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        evaluate(&self.program, x)
    }
}

/// Per-generation summary; index 0 is the initial population.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub best_penalized: f64,
    pub best_raw: f64,
    pub mean_length: f64,
}

fn score_population(pop: &[Program], data: &Columns, y: &[f64], parsimony: f64) -> Vec<Fitness> {
    pop.par_iter()
        .map_init(Evaluator::new, |ev, p| {
            ev.run_with(p, data, |pred| Fitness::from_predictions(pred, y, p.len(), parsimony))
        })
        .collect()
}

/// Runs generational GP and returns the best program seen in any generation.
///
/// The only random stream is seeded from `config.seed` and is consumed in a
/// fixed order: initial population, then per generation one draw sequence per
/// offspring. Fitness evaluation runs in parallel and consumes no randomness,
/// so the result is independent of thread count.
pub fn evolve(config: &GpConfig, x: &Matrix, y: &[f64]) -> Result<GpRegressor> {
    evolve_traced(config, x, y).map(|(r, _)| r)
}

/// [`evolve`], also returning per-generation statistics.
pub fn evolve_traced(config: &GpConfig, x: &Matrix, y: &[f64]) -> Result<(GpRegressor, Vec<GenerationStats>)> {
    config.validate()?;
    if x.rows() == 0 || y.is_empty() {
        return Err(Error::EmptyInput("evolve needs at least one training row"));
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            what: "rows of X vs length of y",
            left: x.rows(),
            right: y.len(),
        });
    }
    let n_features = x.cols();
    if n_features == 0 {
        return Err(Error::EmptyInput("evolve needs at least one feature"));
    }
    let data = Columns::new(x);
    let mut rng = rng_from_seed(config.seed);

    let mut population: Vec<Program> = (0..config.population_size)
        .map(|_| random_program(config, n_features, &mut rng))
        .collect();
    let mut scores = score_population(&population, &data, y, config.parsimony_coefficient);

    let mut best: Option<(Program, Fitness)> = None;
    let mut history = Vec::with_capacity(config.generations + 1);

    let cut_subtree = config.crossover_prob + config.subtree_mut_prob;
    let cut_hoist = cut_subtree + config.hoist_mut_prob;
    let cut_point = cut_hoist + config.point_mut_prob;

    for generation in 0..=config.generations {
        let stats = record_generation(&population, &scores, &mut best);
        log::trace!(
            "gen {generation}: best penalized {:.6}, raw {:.6}, mean length {:.1}",
            stats.best_penalized,
            stats.best_raw,
            stats.mean_length
        );
        history.push(stats);
        if generation == config.generations {
            break;
        }

        let penalized: Vec<f64> = scores.iter().map(|f| f.penalized).collect();
        let sizes: Vec<usize> = population.iter().map(Program::len).collect();
        let k = config.tournament_size;
        let mut next = Vec::with_capacity(config.population_size);
        for _ in 0..config.population_size {
            let parent = &population[tournament_index(&penalized, &sizes, k, &mut rng)];
            let u: f64 = rng.gen();
            let child = if u < config.crossover_prob {
                let donor = &population[tournament_index(&penalized, &sizes, k, &mut rng)];
                subtree_crossover(parent, donor, config.hard_node_cap, &mut rng)
            } else if u < cut_subtree {
                subtree_mutation(parent, config, n_features, &mut rng)
            } else if u < cut_hoist {
                hoist_mutation(parent, &mut rng)
            } else if u < cut_point {
                point_mutation(parent, config, n_features, &mut rng)
            } else {
                parent.clone()
            };
            next.push(child);
        }
        population = next;
        scores = score_population(&population, &data, y, config.parsimony_coefficient);
    }

    let (program, fit) = best.expect("population is non-empty");
    check_features(&program, n_features)?;
    Ok((
        GpRegressor {
            program,
            config: config.clone(),
            fitness: fit.raw,
        },
        history,
    ))
}

fn record_generation(pop: &[Program], scores: &[Fitness], best: &mut Option<(Program, Fitness)>) -> GenerationStats {
    let mut gen_best = 0;
    for i in 1..pop.len() {
        let (a, b) = (&scores[i], &scores[gen_best]);
        if a.penalized
            .total_cmp(&b.penalized)
            .then(pop[i].len().cmp(&pop[gen_best].len()))
            .is_lt()
        {
            gen_best = i;
        }
    }
    let candidate = (&pop[gen_best], scores[gen_best]);
    let replace = match best {
        None => true,
        Some((p, f)) => candidate
            .1
            .penalized
            .total_cmp(&f.penalized)
            .then(candidate.0.len().cmp(&p.len()))
            .is_lt(),
    };
    if replace {
        *best = Some((candidate.0.clone(), candidate.1));
    }
    GenerationStats {
        best_penalized: scores[gen_best].penalized,
        best_raw: scores[gen_best].raw,
        mean_length: pop.iter().map(|p| p.len() as f64).sum::<f64>() / pop.len() as f64,
    }
}
