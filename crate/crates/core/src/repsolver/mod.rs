//! Closed-form representation of solutions and the weighted-norm Picard
//! iteration.

mod kernel;
mod problem;
mod solver;

pub use kernel::{companion_params, main_params, CompanionReading, KernelKind, KernelSet};
pub use problem::{
    history_initial_data, ProblemSpec, RhsShape, RhsSpec, SolutionTrace, TraceMeta, TraceMethod,
};
pub use solver::{
    choose_omega, contraction_factor, weighted_norm, Forcing, PicardReport, RepresentationSolver,
    SolverConfig, WeightedNorm,
};
