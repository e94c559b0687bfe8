//! Propagation and stationary states of Lindblad generators.

use nalgebra::DMatrix;

use super::algebra::{self, c, C64};
use super::expm::expm;
use super::state::DensityMatrix;
use super::superop::{unvec, vec, Superoperator};
use crate::error::{Result, SmeError};

/// Singular values below this (relative to max(1, σ_max)) span the kernel.
pub const KERNEL_TOL: f64 = 1e-9;
/// Largest tolerated real part of a generator eigenvalue.
pub const STABILITY_TOL: f64 = 1e-8;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;

/// e^{L t} as a superoperator.
pub fn propagator(lgen: &Superoperator, t: f64) -> Result<Superoperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SmeError::InvalidParameter(format!(
            "propagation time {t} must be finite and ≥ 0"
        )));
    }
    let m = expm(&(lgen.matrix() * c(t, 0.0)))?;
    Superoperator::from_matrix(lgen.dim(), m)
}

pub fn propagate(lgen: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let out = propagator(lgen, t)?.apply(rho0.as_op())?;
    Ok(DensityMatrix::new_unchecked(out))
}

/// Spectral projector onto the kernel of a generator together with its rank.
#[derive(Debug, Clone)]
pub struct KernelProjector {
    pub matrix: DMatrix<C64>,
    pub rank: usize,
}

/// Largest real part among the generator eigenvalues.
pub fn spectral_abscissa(lgen: &Superoperator) -> Result<f64> {
    let ev = lgen
        .matrix()
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| SmeError::SteadyState("Schur decomposition did not converge".into()))?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

pub fn check_stable(lgen: &Superoperator) -> Result<()> {
    let a = spectral_abscissa(lgen)?;
    if a > STABILITY_TOL {
        return Err(SmeError::Unstable(a));
    }
    Ok(())
}

/// Orthonormal basis of {v : A v = 0} from the SVD, with a relative cutoff.
fn null_space(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = KERNEL_TOL * smax.max(1.0);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] < cut)
        .collect();
    if null.is_empty() {
        return Err(SmeError::SteadyState(
            "generator has an empty kernel".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, null.len(), |i, j| {
        v_t[(null[j], i)].conj()
    }))
}

/// P = R (W†R)⁻¹ W† with R, W the right and left null spaces of L.
///
/// For a stable generator whose zero eigenvalue is semisimple this is the
/// limit of e^{Lt} as t → ∞.
pub fn kernel_projector(lgen: &Superoperator) -> Result<KernelProjector> {
    let m = lgen.matrix();
    let right = null_space(m)?;
    // the U factor is unreliable on null directions, so take the left null
    // space from the right null space of L†
    let left = null_space(&m.adjoint())?;
    if right.ncols() != left.ncols() {
        return Err(SmeError::SteadyState(format!(
            "left and right kernel dimensions differ ({} vs {})",
            left.ncols(),
            right.ncols()
        )));
    }
    let k = right.ncols();
    let (r, w) = (right, left);
    let wh = w.adjoint();
    let gram = &wh * &r;
    let inv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| SmeError::SteadyState("non-semisimple zero eigenvalue".into()))?;
    let cond = algebra::spectral_norm(&gram) * algebra::spectral_norm(&inv);
    if !cond.is_finite() || cond > 1e8 {
        return Err(SmeError::SteadyState(format!(
            "kernel left/right bases nearly orthogonal (condition {cond:.2e})"
        )));
    }
    Ok(KernelProjector {
        matrix: r * inv * wh,
        rank: k,
    })
}

/// lim_{t→∞} e^{Lt} ρ0 via the kernel projector.
pub fn steady_state(lgen: &Superoperator, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    if rho0.dim() != lgen.dim() {
        return Err(SmeError::Dimension(
            "steady_state: state and generator".into(),
        ));
    }
    check_stable(lgen)?;
    let p = kernel_projector(lgen)?;
    let v = &p.matrix * vec(rho0.as_op());
    let resid = (lgen.matrix() * &v).norm();
    if resid > STEADY_RESIDUAL_TOL {
        return Err(SmeError::SteadyState(format!(
            "residual ‖L ρ_ss‖ = {resid:.3e}"
        )));
    }
    let rho = algebra::hermitian_part(&unvec(&v, lgen.dim())?);
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-8 {
        return Err(SmeError::SteadyState(format!("stationary trace {tr}")));
    }
    Ok(DensityMatrix::new_unchecked(rho * c(1.0 / tr, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::algebra::{projector, sigma_minus, sigma_z, sup_norm, Operator};
    use crate::operator_core::state::InitialState;
    use crate::operator_core::superop::{liouvillian_build, Jump};

    fn rk4_step_doubled(
        l: &DMatrix<C64>,
        v0: &nalgebra::DVector<C64>,
        t: f64,
        steps: usize,
    ) -> nalgebra::DVector<C64> {
        let run = |n: usize| {
            let h = c(t / n as f64, 0.0);
            let mut v = v0.clone();
            for _ in 0..n {
                let k1 = l * &v;
                let k2 = l * (&v + &k1 * (h * 0.5));
                let k3 = l * (&v + &k2 * (h * 0.5));
                let k4 = l * (&v + &k3 * h);
                v += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * (h / 6.0);
            }
            v
        };
        let coarse = run(steps);
        let fine = run(2 * steps);
        // Richardson extrapolation for a fourth-order scheme
        &fine + (&fine - &coarse) * c(1.0 / 15.0, 0.0)
    }

    #[test]
    fn zero_time_is_exact() {
        let l = liouvillian_build(&sigma_z(), &[Jump::new(0.3, sigma_minus())]).unwrap();
        let rho = InitialState::Plus.qubit();
        assert_eq!(propagate(&l, &rho, 0.0).unwrap(), rho);
    }

    #[test]
    fn dephasing_coherence() {
        let l = liouvillian_build(&algebra::zeros(2), &[Jump::new(0.5, sigma_z())]).unwrap();
        let out = propagate(&l, &InitialState::Plus.qubit(), 1.0).unwrap();
        assert!((out.as_op()[(0, 1)].re - 0.5 * (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_runge_kutta_oracle() {
        let h = Operator::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(0.7, 0.0),
            (1, 1) => c(-0.4, 0.0),
            (0, 1) => c(0.3, -0.2),
            _ => c(0.3, 0.2),
        });
        let jumps = [
            Jump::new(0.4, sigma_minus()),
            Jump::new(
                0.25,
                Operator::from_fn(2, 2, |i, j| c(0.2 * i as f64, 0.5 - j as f64)),
            ),
        ];
        let l = liouvillian_build(&h, &jumps).unwrap();
        let rho = InitialState::Plus.qubit();
        let out = propagate(&l, &rho, 2.0).unwrap();
        let oracle = rk4_step_doubled(l.matrix(), &vec(rho.as_op()), 2.0, 2000);
        assert!((vec(out.as_op()) - oracle).camax() < 1e-8);
    }

    #[test]
    fn pure_dephasing_steady_state_keeps_populations() {
        let l = liouvillian_build(&sigma_z(), &[Jump::new(0.5, sigma_z())]).unwrap();
        let ss = steady_state(&l, &InitialState::Plus.qubit()).unwrap();
        assert!(sup_norm(&(ss.as_op() - algebra::diag(&[0.5, 0.5]))) < 1e-12);
    }

    #[test]
    fn zero_generator_returns_input() {
        let l = Superoperator::zeros(2);
        let rho = InitialState::Plus.qubit();
        let ss = steady_state(&l, &rho).unwrap();
        assert!(sup_norm(&(ss.as_op() - rho.as_op())) < 1e-14);
    }

    #[test]
    fn amplitude_damping_relaxes_to_ground() {
        let l = liouvillian_build(&algebra::zeros(2), &[Jump::new(1.0, sigma_minus())]).unwrap();
        let rho = InitialState::Excited.qubit();
        let ss = steady_state(&l, &rho).unwrap();
        assert!(sup_norm(&(ss.as_op() - projector(2, 0))) < 1e-12);
        let late = propagate(&l, &rho, 50.0).unwrap();
        assert!(sup_norm(&(ss.as_op() - late.as_op())) < 1e-8);
    }

    #[test]
    fn unstable_generator_is_rejected() {
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 0)] = c(0.1, 0.0);
        let l = Superoperator::from_matrix(2, m).unwrap();
        assert!(matches!(
            steady_state(&l, &InitialState::Plus.qubit()),
            Err(SmeError::Unstable(_))
        ));
    }
}
