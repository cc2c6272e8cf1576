//! Tree-based genetic programming for symbolic regression.

mod config;
mod eval;
mod evolve;
mod operators;
mod program;

pub use config::GpConfig;
pub use eval::{evaluate, fitness, Columns, Evaluator, Fitness};
pub use evolve::{evolve, evolve_traced, GenerationStats, GpRegressor};
pub use operators::{
    hoist_mutation, point_mutation, random_program, subtree_crossover, subtree_mutation, tournament_index,
    tournament_select,
};
pub use program::{Node, Program};

pub(crate) use eval::mean_abs_error;
