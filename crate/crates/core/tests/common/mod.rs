#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinsme::dispersive_frame::{
    build_frame, DispersiveFrame, DriveParams, Efficiency, FrameSettings, LeakRate, SystemModel,
};
use spinsme::operator_core::algebra::{c, Operator, C64};
use spinsme::operator_core::state::DensityMatrix;
use spinsme::sme_engine::ReducedDynamics;
use spinsme::spin_bath::{field_strength, BathSpec};

/// Reference point: levels 0 and 50, γ = 2, ω_c = ω_p = 30, ξ = 10, κ = 10,
/// η = 1, φ = −π/2, Δ = 0, α = 1.
pub fn drive(kappa: f64, alpha: Option<C64>) -> DriveParams {
    DriveParams {
        omega_c: 30.0,
        omega_p: 30.0,
        xi: c(10.0, 0.0),
        kappa: LeakRate::new(kappa).unwrap(),
        eta: Efficiency::new(1.0).unwrap(),
        phi: -std::f64::consts::FRAC_PI_2,
        delta: 0.0,
        alpha,
    }
}

/// Model with the tuning field evaluated for `bath`.
pub fn model(kappa: f64, alpha: Option<C64>, bath: &BathSpec) -> SystemModel {
    let m = SystemModel::qubit(0.0, 50.0, 2.0, drive(kappa, alpha)).unwrap();
    let of = field_strength(&m, bath).unwrap();
    m.with_tuning_field(of).unwrap()
}

pub fn reference(
    bath: &BathSpec,
    corrections: bool,
) -> (SystemModel, DispersiveFrame, ReducedDynamics) {
    let m = model(10.0, Some(c(1.0, 0.0)), bath);
    let f = build_frame(&m, &FrameSettings::default()).unwrap();
    let d = ReducedDynamics::new(&m, &f, corrections);
    (m, f, d)
}

pub fn max_abs(a: &Operator) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Seeded source of random operators for oracle construction.
pub struct Gen(ChaCha8Rng);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random()
    }

    pub fn sym(&mut self) -> f64 {
        self.0.random_range(-1.0..1.0)
    }

    pub fn complex(&mut self, n: usize) -> Operator {
        Operator::from_fn(n, n, |_, _| c(self.sym(), self.sym()))
    }

    pub fn hermitian(&mut self, n: usize) -> Operator {
        let a = self.complex(n);
        (&a + a.adjoint()) * c(0.5, 0.0)
    }

    pub fn density(&mut self, n: usize) -> DensityMatrix {
        let a = self.complex(n);
        let p = &a * a.adjoint();
        let t = p.trace();
        DensityMatrix::new(p / t).unwrap()
    }
}
