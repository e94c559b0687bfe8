//! System ⊗ cavity model before elimination, used as a reference for the
//! reduced equation.
//!
//! The cavity is represented in the displaced Fock basis: a = b + α with b the
//! truncated annihilation operator and α = ξ/(i(κ + iΔ)) the driven amplitude,
//! so the initial cavity state is the b-vacuum and low cutoffs suffice.

use nalgebra::DMatrix;

use super::stepper::Stepper;
use super::trajectory::{run_stepper, SimParams, TrajectoryRecord};
use super::unconditional::{path_with, TimeGrid};
use crate::dispersive_frame::{DispersiveFrame, SystemModel};
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, c, kron, Operator, C64, I};
use crate::operator_core::expm::expm;
use crate::operator_core::state::DensityMatrix;
use crate::operator_core::superop::{liouvillian_build, Jump, Superoperator};
use crate::spin_bath::ThetaSector;

/// Top-two Fock population above which a run is flagged.
pub const TRUNCATION_WARN: f64 = 1e-4;
/// Top-two Fock population above which a run is rejected.
pub const TRUNCATION_ABORT: f64 = 1e-2;
/// The leak channel is (LEAK_FACTOR·κ)D[a(1 + Λ)]: the field amplitude then
/// relaxes at κ, matching α = ξ/(iκ) and a measurement rate 2ηκ ≤ 2κ.
pub const LEAK_FACTOR: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct FullDynamics {
    dim_s: usize,
    cutoff: usize,
    h_base: Operator,
    h_bath: Operator,
    jumps: Vec<Jump>,
    meas: Operator,
    eta_kappa: f64,
    alpha: C64,
}

fn annihilation(n: usize) -> Operator {
    Operator::from_fn(n, n, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

impl FullDynamics {
    /// H = H_S^D + H_field + (Δ + O_S)a†a + ξa†(1 + Λ) + ξ*(1 + Λ)a
    /// with bath coupling S̃ + Q a†a + G_−a + G_+a† per unit θ.
    pub fn new(model: &SystemModel, frame: &DispersiveFrame, cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(SmeError::InvalidParameter(format!(
                "Fock cutoff {cutoff} < 2"
            )));
        }
        let ds = model.dim();
        let kappa = model.kappa();
        let delta = model.drive.delta;
        let xi = model.drive.xi;
        let alpha = xi / (I * c(kappa, delta));

        let id_s = algebra::identity(ds);
        let id_c = algebra::identity(cutoff);
        let sys = |m: &Operator| kron(m, &id_c);
        let a = kron(&id_s, &annihilation(cutoff)) + algebra::identity(ds * cutoff) * alpha;
        let ad = a.adjoint();
        let n_op = &ad * &a;
        let one_l = sys(&(&id_s + &frame.lambda_op));

        let h_base = sys(&(&frame.h_sd + model.h_field()))
            + (algebra::identity(ds * cutoff) * c(delta, 0.0) + sys(&frame.o_s)) * &n_op
            + &ad * &one_l * xi
            + &one_l * &a * xi.conj();
        let h_bath = sys(&frame.s_tilde)
            + sys(&frame.q) * &n_op
            + sys(&frame.g_minus) * &a
            + sys(&frame.g_plus) * &ad;

        let leak = &a * &one_l;
        let meas = &leak * C64::from_polar(1.0, -model.drive.phi);
        Ok(Self {
            dim_s: ds,
            cutoff,
            h_base: algebra::hermitian_part(&h_base),
            h_bath: algebra::hermitian_part(&h_bath),
            jumps: vec![
                Jump::new(kappa, sys(&frame.x)),
                Jump::new(LEAK_FACTOR * kappa, leak),
            ],
            meas,
            eta_kappa: model.eta() * kappa,
            alpha,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_s * self.cutoff
    }

    /// Displacement of the Fock basis.
    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn generator(&self, theta: f64) -> Result<Superoperator> {
        liouvillian_build(&(&self.h_base + &self.h_bath * c(theta, 0.0)), &self.jumps)
    }

    pub fn measurement(&self) -> &Operator {
        &self.meas
    }

    /// ρ_S ⊗ |0⟩⟨0| in the displaced basis.
    pub fn initial_state(&self, rho_s: &DensityMatrix) -> Result<Operator> {
        if rho_s.dim() != self.dim_s {
            return Err(SmeError::Dimension("system state vs full model".into()));
        }
        Ok(kron(rho_s.as_op(), &algebra::projector(self.cutoff, 0)))
    }

    pub fn reduce(&self, rho: &Operator) -> Result<Operator> {
        algebra::partial_trace(rho, &[self.dim_s, self.cutoff], 1)
    }

    /// Population of the two highest retained Fock levels.
    pub fn top_population(&self, rho: &Operator) -> Result<f64> {
        let cav = algebra::partial_trace(rho, &[self.dim_s, self.cutoff], 0)?;
        let n = self.cutoff;
        Ok(cav[(n - 1, n - 1)].re + cav[(n - 2, n - 2)].re)
    }

    fn check_truncation(&self, top: f64) -> Result<bool> {
        if top > TRUNCATION_ABORT {
            return Err(SmeError::Truncation(top));
        }
        Ok(top > TRUNCATION_WARN)
    }
}

/// Unconditional full-model evolution, reduced to the system and mixed over sectors.
#[derive(Debug, Clone)]
pub struct FullPath {
    pub times: Vec<f64>,
    pub system: Vec<Operator>,
    pub max_top_population: f64,
    pub truncation_warning: bool,
}

pub fn full_unconditional(
    full: &FullDynamics,
    sectors: &[ThetaSector],
    rho_s: &DensityMatrix,
    grid: TimeGrid,
) -> Result<FullPath> {
    let rho0 = full.initial_state(rho_s)?;
    let mut system = vec![algebra::zeros(full.dim_s); grid.steps + 1];
    let mut cavity: Vec<Operator> = vec![algebra::zeros(full.dim()); grid.steps + 1];
    for s in sectors {
        let lgen = full.generator(s.theta)?;
        let step: DMatrix<C64> = expm(&(lgen.matrix() * c(grid.dt, 0.0)))?;
        let path = path_with(&step, &rho0, grid.steps)?;
        for ((sys, joint), p) in system.iter_mut().zip(cavity.iter_mut()).zip(path) {
            *sys += full.reduce(&p)? * c(s.weight, 0.0);
            *joint += p * c(s.weight, 0.0);
        }
    }
    let mut top: f64 = 0.0;
    for joint in &cavity {
        top = top.max(full.top_population(joint)?);
    }
    let warn = full.check_truncation(top)?;
    Ok(FullPath {
        times: grid.times(),
        system,
        max_top_population: top,
        truncation_warning: warn,
    })
}

/// Conditioned full-model run with its truncation diagnostics.
#[derive(Debug, Clone)]
pub struct FullRecord {
    pub record: TrajectoryRecord,
    pub system_states: Vec<Operator>,
    pub max_top_population: f64,
    pub truncation_warning: bool,
}

/// One homodyne trajectory of the full model in sector θ.
pub fn simulate_full(
    full: &FullDynamics,
    theta: f64,
    rho_s: &DensityMatrix,
    params: &SimParams,
    seed: u64,
) -> Result<FullRecord> {
    params.validate()?;
    let lgen = full.generator(theta)?;
    let stepper = Stepper::new(
        &lgen,
        full.meas.clone(),
        full.eta_kappa,
        params.dt,
        params.scheme,
        false,
    )?;
    let record = run_stepper(
        &stepper,
        &full.initial_state(rho_s)?,
        params.steps(),
        params.store_stride,
        params.current_bin,
        seed,
        theta,
        false,
    )?;
    let mut top: f64 = 0.0;
    let mut system_states = Vec::with_capacity(record.states.len());
    for st in &record.states {
        top = top.max(full.top_population(st)?);
        system_states.push(full.reduce(st)?);
    }
    let truncation_warning = full.check_truncation(top)?;
    Ok(FullRecord {
        record,
        system_states,
        max_top_population: top,
        truncation_warning,
    })
}
