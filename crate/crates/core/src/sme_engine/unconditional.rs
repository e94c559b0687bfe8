use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::reduced::ReducedDynamics;
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, c, Operator, C64};
use crate::operator_core::expm::expm;
use crate::operator_core::state::DensityMatrix;
use crate::operator_core::superop::{unvec, vec};
use crate::spin_bath::{
    pair_kernel, sectors_with, BathSpec, DephasingClass, QuadratureRule, ThetaSector,
};

/// How Gaussian ensembles are discretised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quadrature {
    /// Time at which time-dependent ensemble widths are frozen.
    pub t_ref: f64,
    pub nodes: usize,
    pub rule: QuadratureRule,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            t_ref: 1.0,
            nodes: 41,
            rule: QuadratureRule::GaussHermite,
        }
    }
}

impl Quadrature {
    pub fn sectors(&self, bath: &BathSpec) -> Result<Vec<ThetaSector>> {
        sectors_with(bath, self.t_ref, self.nodes, self.rule)
    }
}

/// Uniform output grid t_k = k·dt for k = 0..=steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SmeError::InvalidParameter(format!(
                "grid step {dt} must be positive"
            )));
        }
        Ok(Self { dt, steps })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| k as f64 * self.dt).collect()
    }
}

/// Path of one sector's unconditional state on the grid.
pub fn sector_path(
    dynamics: &ReducedDynamics,
    theta: f64,
    rho0: &Operator,
    grid: TimeGrid,
) -> Result<Vec<Operator>> {
    let lgen = dynamics.generator(theta)?;
    let step = expm(&(lgen.matrix() * c(grid.dt, 0.0)))?;
    path_with(&step, rho0, grid.steps)
}

pub(crate) fn path_with(
    step: &DMatrix<C64>,
    rho0: &Operator,
    steps: usize,
) -> Result<Vec<Operator>> {
    let n = rho0.nrows();
    let mut v = vec(rho0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(rho0.clone());
    for _ in 0..steps {
        v = step * v;
        out.push(algebra::hermitian_part(&unvec(&v, n)?));
    }
    Ok(out)
}

/// Weighted mixture of sector paths.
pub fn mixture_path(
    dynamics: &ReducedDynamics,
    sectors: &[ThetaSector],
    rho0: &DensityMatrix,
    grid: TimeGrid,
) -> Result<Vec<Operator>> {
    let n = rho0.dim();
    let mut acc = vec![algebra::zeros(n); grid.steps + 1];
    for s in sectors {
        let path = sector_path(dynamics, s.theta, rho0.as_op(), grid)?;
        for (a, p) in acc.iter_mut().zip(path) {
            *a += p * c(s.weight, 0.0);
        }
    }
    Ok(acc)
}

/// Unconditional system state averaged over the bath ensemble.
///
/// Discrete baths and the static-width Gaussian classes are averaged over their
/// θ-sectors. For the time-dependent classes (p = 1, 3/2) the θ = 0 path is
/// evolved and its coherences, taken in the eigenbasis of the effective bath
/// coupling, are multiplied by the analytic Gaussian kernel at each time.
pub fn unconditional_evolve(
    dynamics: &ReducedDynamics,
    bath: &BathSpec,
    quad: Quadrature,
    rho0: &DensityMatrix,
    grid: TimeGrid,
) -> Result<Vec<DensityMatrix>> {
    let time_dependent = matches!(
        bath,
        BathSpec::GaussianScaled {
            p: DephasingClass::Linear | DephasingClass::ThreeHalves,
            ..
        }
    );
    let path = if time_dependent {
        kernel_path(dynamics, bath, rho0, grid)?
    } else {
        let secs = quad.sectors(bath)?;
        mixture_path(dynamics, &secs, rho0, grid)?
    };
    Ok(path.into_iter().map(DensityMatrix::new_unchecked).collect())
}

fn kernel_path(
    dynamics: &ReducedDynamics,
    bath: &BathSpec,
    rho0: &DensityMatrix,
    grid: TimeGrid,
) -> Result<Vec<Operator>> {
    let (s_vals, basis) = algebra::hermitian_eigen(dynamics.s_eff());
    let base = sector_path(dynamics, 0.0, rho0.as_op(), grid)?;
    let n = rho0.dim();
    base.into_iter()
        .enumerate()
        .map(|(k, rho)| {
            let t = k as f64 * grid.dt;
            let mut r = basis.adjoint() * rho * &basis;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        r[(i, j)] *= pair_kernel(bath, t, s_vals[i] - s_vals[j])?;
                    }
                }
            }
            Ok(&basis * r * basis.adjoint())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersive_frame::{
        build_frame, DriveParams, Efficiency, FrameSettings, LeakRate, SystemModel,
    };
    use crate::operator_core::state::InitialState;
    use crate::spin_bath::coherence_kernel;

    fn dynamics(gamma: f64, alpha: C64) -> ReducedDynamics {
        let drive = DriveParams {
            omega_c: 30.0,
            omega_p: 30.0,
            xi: c(10.0, 0.0),
            kappa: LeakRate::new(10.0).unwrap(),
            eta: Efficiency::new(1.0).unwrap(),
            phi: -std::f64::consts::FRAC_PI_2,
            delta: 0.0,
            alpha: Some(alpha),
        };
        let m = SystemModel::qubit(0.0, 50.0, gamma, drive)
            .unwrap()
            .with_tuning_field(-50.0)
            .unwrap();
        let f = build_frame(&m, &FrameSettings::default()).unwrap();
        ReducedDynamics::new(&m, &f, false)
    }

    #[test]
    fn weightless_bath_is_unitary() {
        let dy = dynamics(0.0, c(0.0, 0.0));
        let grid = TimeGrid::new(0.1, 20).unwrap();
        let bath = BathSpec::single_spin(0.0, 0.5);
        let path = unconditional_evolve(
            &dy,
            &bath,
            Quadrature::default(),
            &InitialState::Plus.qubit(),
            grid,
        )
        .unwrap();
        // H = diag(0, 50) − 25σ_z − const: the gap vanishes, so the state is frozen
        for p in &path {
            assert!((p.purity() - 1.0).abs() < 1e-12);
            assert!((p.as_op()[(0, 1)] - c(0.5, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn two_sector_revivals() {
        // no cavity coupling: the bath alone gives the cos(4t) envelope
        let dy = dynamics(0.0, c(0.0, 0.0));
        let grid = TimeGrid::new(std::f64::consts::PI / 40.0, 40).unwrap();
        let bath = BathSpec::single_spin(2.0, 0.5);
        let path = unconditional_evolve(
            &dy,
            &bath,
            Quadrature::default(),
            &InitialState::Plus.qubit(),
            grid,
        )
        .unwrap();
        for (k, p) in path.iter().enumerate() {
            let t = k as f64 * grid.dt;
            assert!((p.as_op()[(0, 1)] - c(0.5 * (4.0 * t).cos(), 0.0)).norm() < 1e-10);
        }
        // revival at t = π/2
        assert!((path[20].as_op()[(0, 1)].re - 0.5).abs() < 1e-10);
    }

    #[test]
    fn gaussian_static_matches_kernel() {
        let dy = dynamics(0.0, c(0.0, 0.0));
        let grid = TimeGrid::new(0.05, 20).unwrap();
        let bath = BathSpec::GaussianStatic { v: 1.0 };
        let quad = Quadrature {
            t_ref: 1.0,
            nodes: 40,
            ..Quadrature::default()
        };
        let path =
            unconditional_evolve(&dy, &bath, quad, &InitialState::Plus.qubit(), grid).unwrap();
        for (k, p) in path.iter().enumerate() {
            let t = k as f64 * grid.dt;
            let want = 0.5 * coherence_kernel(&bath, t).unwrap().re;
            assert!((p.as_op()[(0, 1)].re - want).abs() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_class_uses_kernel() {
        let dy = dynamics(0.0, c(0.0, 0.0));
        let grid = TimeGrid::new(0.1, 10).unwrap();
        let bath = BathSpec::GaussianScaled {
            v: 1.0,
            p: DephasingClass::Linear,
        };
        let path = unconditional_evolve(
            &dy,
            &bath,
            Quadrature::default(),
            &InitialState::Plus.qubit(),
            grid,
        )
        .unwrap();
        for (k, p) in path.iter().enumerate() {
            let t = k as f64 * grid.dt;
            assert!((p.as_op()[(0, 1)].re - 0.5 * (-t).exp()).abs() < 1e-12);
        }
    }
}
