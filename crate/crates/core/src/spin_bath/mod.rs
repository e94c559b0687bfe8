//! Commuting spin environment: θ-sector decomposition, Gaussian dephasing
//! ensembles and the tuning field that recentres the level gap.

mod bath;
mod field;

pub use bath::{
    coherence_kernel, enumerate_sectors, pair_kernel, quadrature_sectors, sample_theta, sectors,
    sectors_with, uniform_sectors, BathSpec, DephasingClass, QuadratureRule, ThetaSector,
    MAX_ENUMERATED_SPINS, MERGE_TOL, UNIFORM_HALF_WIDTH,
};
pub use field::{bath_mean, field_strength};
