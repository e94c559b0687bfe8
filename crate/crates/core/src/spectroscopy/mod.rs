//! Current correlations and homodyne spectra by quantum regression, the
//! Welch periodogram of simulated currents, peak metrics, and the two-system
//! cross-correlation.

mod pair;
mod periodogram;
mod regression;
mod spectrum;

pub use pair::{cross_correlation, joint_sectors, CrossCorrelation, JointSector, PairModel};
pub use periodogram::{periodogram_spectrum, Periodogram, WelchSettings};
pub use regression::{CorrelationResult, Regression, StationarySector, TauGrid};
pub use spectrum::{
    half_transform, peak_metrics, spectrum, PeakMetrics, Rescale, SpectrumResult, TAIL_TOL,
};

use crate::dispersive_frame::{DispersiveFrame, SystemModel};
use crate::operator_core::algebra::Operator;

/// (ĉ, x̂ = ĉ + ĉ†), with ĉ free of the √(2ηκ) factor.
pub fn build_measurement_operator(
    model: &SystemModel,
    frame: &DispersiveFrame,
) -> (Operator, Operator) {
    let c = crate::sme_engine::measurement_operator(model, frame);
    let x = &c + c.adjoint();
    (c, x)
}
