use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::reduced::ReducedDynamics;
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, c, Operator, C64};
use crate::operator_core::expm::expm;
use crate::operator_core::state::DensityMatrix;
use crate::operator_core::superop::{meas_superop_unchecked, unvec, vec, Superoperator};

/// Per-step trace drift above this aborts the integration.
pub const TRACE_DRIFT_ABORT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// ρ' = e^{L dt}(ρ + √(2ηκ) 𝓗[m]ρ ΔW); the ensemble mean is exact.
    #[default]
    ExponentialEuler,
    /// ρ' = ρ + Lρ dt + √(2ηκ) 𝓗[m]ρ ΔW
    EulerMaruyama,
}

/// Fixed-step integrator of dρ = Lρ dt + √(2ηκ) 𝓗[m]ρ dW for one generator.
#[derive(Debug, Clone)]
pub struct Stepper {
    dim: usize,
    dt: f64,
    scheme: Scheme,
    /// e^{L dt} or I + L dt
    map: DMatrix<C64>,
    meas: Operator,
    meas_x: Operator,
    sqrt_rate: f64,
    rate: f64,
    clamp: bool,
}

impl Stepper {
    pub fn new(
        lgen: &Superoperator,
        meas: Operator,
        eta_kappa: f64,
        dt: f64,
        scheme: Scheme,
        clamp: bool,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SmeError::InvalidParameter(format!(
                "time step {dt} must be positive"
            )));
        }
        if meas.nrows() != lgen.dim() {
            return Err(SmeError::Dimension(
                "measurement operator vs generator".into(),
            ));
        }
        let n2 = lgen.dim() * lgen.dim();
        let map = match scheme {
            Scheme::ExponentialEuler => expm(&(lgen.matrix() * c(dt, 0.0)))?,
            Scheme::EulerMaruyama => DMatrix::identity(n2, n2) + lgen.matrix() * c(dt, 0.0),
        };
        let meas_x = &meas + meas.adjoint();
        Ok(Self {
            dim: lgen.dim(),
            dt,
            scheme,
            map,
            meas,
            meas_x,
            sqrt_rate: (2.0 * eta_kappa).sqrt(),
            rate: 2.0 * eta_kappa,
            clamp,
        })
    }

    pub fn for_sector(
        dynamics: &ReducedDynamics,
        theta: f64,
        dt: f64,
        scheme: Scheme,
        clamp: bool,
    ) -> Result<Self> {
        let lgen = dynamics.generator(theta)?;
        Self::new(
            &lgen,
            dynamics.measurement().clone(),
            dynamics.eta_kappa(),
            dt,
            scheme,
            clamp,
        )
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// ⟨m + m†⟩ in state ρ.
    pub fn signal(&self, rho: &Operator) -> f64 {
        (&self.meas_x * rho).trace().re
    }

    /// Increment of the integrated current over one step: 2ηκ⟨m + m†⟩dt + √(2ηκ)ΔW.
    pub fn charge(&self, rho: &Operator, dw: f64) -> f64 {
        self.rate * self.signal(rho) * self.dt + self.sqrt_rate * dw
    }

    /// One step; `time` only labels abort diagnostics.
    pub fn step(&self, rho: &Operator, dw: f64, time: f64) -> Result<Operator> {
        if !dw.is_finite() {
            return Err(SmeError::NumericalAbort {
                time,
                reason: "non-finite Wiener increment".into(),
            });
        }
        let kick = if self.sqrt_rate > 0.0 && dw != 0.0 {
            rho + meas_superop_unchecked(&self.meas, rho) * c(self.sqrt_rate * dw, 0.0)
        } else {
            rho.clone()
        };
        let next = match self.scheme {
            Scheme::ExponentialEuler => unvec(&(&self.map * vec(&kick)), self.dim)?,
            Scheme::EulerMaruyama => {
                let drift = unvec(&(&self.map * vec(rho)), self.dim)? - rho;
                drift + kick
            }
        };
        let mut next = algebra::hermitian_part(&next);
        let drift = (next.trace().re - rho.trace().re).abs();
        if !drift.is_finite() || drift > TRACE_DRIFT_ABORT {
            return Err(SmeError::NumericalAbort {
                time,
                reason: format!("trace drift {drift:.3e} in one step; reduce dt"),
            });
        }
        if self.clamp {
            next = DensityMatrix::new_unchecked(next).clamp_psd().into_op();
        }
        Ok(next)
    }
}

/// One integration step of the reduced equation in sector θ.
pub fn step_reduced(
    rho: &DensityMatrix,
    dynamics: &ReducedDynamics,
    theta: f64,
    dt: f64,
    dw: f64,
    scheme: Scheme,
) -> Result<DensityMatrix> {
    let s = Stepper::for_sector(dynamics, theta, dt, scheme, false)?;
    Ok(DensityMatrix::new_unchecked(s.step(
        rho.as_op(),
        dw,
        0.0,
    )?))
}
