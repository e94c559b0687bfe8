//! Reduced and full homodyne stochastic master equations, their
//! unconditional counterparts, and trajectory ensembles.

mod full;
mod reduced;
mod stepper;
mod trajectory;
mod unconditional;

pub use full::{
    full_unconditional, simulate_full, FullDynamics, FullPath, FullRecord, LEAK_FACTOR,
    TRUNCATION_ABORT, TRUNCATION_WARN,
};
pub use reduced::{measurement_operator, ReducedDynamics};
pub use stepper::{step_reduced, Scheme, Stepper, TRACE_DRIFT_ABORT};
pub use trajectory::{
    allocate, child_seed, run_stepper, simulate_ensemble, simulate_trajectory, Ensemble, SimParams,
    TrajectoryRecord, WienerSource,
};
pub use unconditional::{mixture_path, sector_path, unconditional_evolve, Quadrature, TimeGrid};
