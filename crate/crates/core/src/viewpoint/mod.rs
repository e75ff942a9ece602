//! Next-best-view search: a genetic algorithm over a discrete Fibonacci
//! lattice of view directions, maximizing the area mismatch between the
//! remaining stock and the shape.

mod candidates;
mod fitness;
mod ga;

pub use candidates::{angular_distance, fibonacci_sample, CandidateSet, KNN};
pub use fitness::{evaluate_fitness, ViewEvaluator};
pub use ga::{
    crossover, elitist_select, farthest_point_init, mutate, roulette_select_parents, run_ga,
    run_ga_with, Crossover, GaConfig, GaOutcome, Individual, Population,
};
