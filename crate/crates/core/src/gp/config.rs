use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evolution parameters for one symbolic-regression run.
///
/// Defaults follow gplearn's `SymbolicRegressor` with a population of 200
/// evolved for 200 generations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_prob: f64,
    pub subtree_mut_prob: f64,
    pub hoist_mut_prob: f64,
    pub point_mut_prob: f64,
    pub point_replace_prob: f64,
    pub init_depth_min: usize,
    pub init_depth_max: usize,
    pub constant_range: (f64, f64),
    pub parsimony_coefficient: f64,
    pub hard_node_cap: usize,
    pub seed: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            population_size: 200,
            generations: 200,
            tournament_size: 20,
            crossover_prob: 0.9,
            subtree_mut_prob: 0.01,
            hoist_mut_prob: 0.01,
            point_mut_prob: 0.01,
            point_replace_prob: 0.05,
            init_depth_min: 2,
            init_depth_max: 6,
            constant_range: (-1.0, 1.0),
            parsimony_coefficient: 0.001,
            hard_node_cap: 2048,
            seed: 0,
        }
    }
}

impl GpConfig {
    pub fn with_budget(population_size: usize, generations: usize) -> Self {
        Self {
            population_size,
            generations,
            ..Self::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be positive".into());
        }
        let probs = [
            ("crossover_prob", self.crossover_prob),
            ("subtree_mut_prob", self.subtree_mut_prob),
            ("hoist_mut_prob", self.hoist_mut_prob),
            ("point_mut_prob", self.point_mut_prob),
            ("point_replace_prob", self.point_replace_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not in [0, 1]"));
            }
        }
        let total = self.crossover_prob + self.subtree_mut_prob + self.hoist_mut_prob + self.point_mut_prob;
        if total > 1.0 + 1e-12 {
            return bad(format!("operator probabilities sum to {total} > 1"));
        }
        if self.init_depth_min > self.init_depth_max {
            return bad(format!(
                "init depth range [{}, {}] is empty",
                self.init_depth_min, self.init_depth_max
            ));
        }
        let (lo, hi) = self.constant_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad(format!("constant range [{lo}, {hi}] is invalid"));
        }
        if !(self.parsimony_coefficient >= 0.0 && self.parsimony_coefficient.is_finite()) {
            return bad("parsimony_coefficient must be a non-negative number".into());
        }
        if self.hard_node_cap == 0 {
            return bad("hard_node_cap must be positive".into());
        }
        Ok(())
    }
}
