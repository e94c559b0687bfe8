//! Numeric substrate: operators, density matrices, superoperators,
//! matrix exponentials and stationary states.

pub mod algebra;
pub mod expm;
pub mod state;
pub mod steady;
pub mod superop;

pub use algebra::{
    anticommutator, commutator, dagger, kron, partial_trace, trace_distance, Operator, C64,
};
pub use expm::expm;
pub use state::{DensityMatrix, InitialState};
pub use steady::{kernel_projector, propagate, propagator, steady_state, KernelProjector};
pub use superop::{
    dissipator_apply, liouvillian_build, meas_superop_apply, unvec, vec, Jump, Superoperator,
};
