//! Seeded graph matching on dense adjacency matrices.
//!
//! Given two graphs of equal order and a partial correspondence between
//! them (the seeds), the solver relaxes the remaining assignment problem
//! over doubly stochastic matrices, climbs the quadratic objective with
//! Frank-Wolfe steps whose linearizations are solved exactly as linear
//! assignment problems, and rounds the final iterate back to a
//! permutation. The [`sim`] module measures recovery rates on correlated
//! random graph pairs as a function of seed count and noise.
//!
//! Modules:
//! - [`graph`]: labeled graphs, edge-list I/O, seeded canonical form
//! - [`lap`]: linear assignment (Hungarian and an exhaustive oracle)
//! - [`solver`]: the relaxation, line search, and rounding
//! - [`sim`]: correlated random-graph benchmarks

pub mod graph;
pub mod lap;
pub mod sim;
pub mod solver;

pub use graph::{
    canonicalize, count_disagreements, load_edge_list, load_seed_spec, write_edge_list, Graph,
    GraphError, SeedSpec, SeededInstance,
};
pub use lap::{brute_force_lap, solve_lap_max, LapError, Permutation};
pub use sim::{
    gen_er, match_ratio, perturb, plant_correspondence, run_sweep, run_trial, SimConfig, SimError,
    TrialOutput, TrialRecord,
};
pub use solver::{
    frank_wolfe_solve, gradient, line_search, match_graphs, objective, project_to_permutation,
    DoublyStochasticMatrix, IterationStat, LineSearchCoefficients, MatchResult, RelaxedSolution,
    SolverConfig, SolverError, DS_TOLERANCE,
};
