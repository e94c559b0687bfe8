//! Generalized dispersive frame of a system coupled to a driven leaky cavity.

mod frame;
mod model;

pub use frame::{
    build_frame, build_x, validity_report, DispersiveFrame, PairRatio, ValidityReport,
};
pub use model::{DriveParams, Efficiency, FrameSettings, LeakRate, SystemModel};
