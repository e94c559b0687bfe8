use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectrum::{Rescale, SpectrumResult};
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{c, Operator, C64, I};
use crate::operator_core::expm::expm;
use crate::operator_core::state::DensityMatrix;
use crate::operator_core::steady::{check_stable, kernel_projector, STEADY_RESIDUAL_TOL};
use crate::operator_core::superop::{vec, Superoperator};
use crate::sme_engine::ReducedDynamics;
use crate::spin_bath::ThetaSector;

/// A bath sector's generator with its stationary state and kernel projector.
#[derive(Debug, Clone)]
pub struct StationarySector {
    pub weight: f64,
    pub lgen: Superoperator,
    pub projector: DMatrix<C64>,
    pub rho_ss: Operator,
}

impl StationarySector {
    pub fn new(weight: f64, lgen: Superoperator, rho0: &DensityMatrix) -> Result<Self> {
        check_stable(&lgen)?;
        let p = kernel_projector(&lgen)?;
        let v = &p.matrix * vec(rho0.as_op());
        let resid = (lgen.matrix() * &v).norm();
        if resid > STEADY_RESIDUAL_TOL {
            return Err(SmeError::SteadyState(format!(
                "residual ‖L ρ_ss‖ = {resid:.3e}"
            )));
        }
        let rho_ss = Operator::from_column_slice(lgen.dim(), lgen.dim(), v.as_slice());
        Ok(Self {
            weight,
            lgen,
            projector: p.matrix,
            rho_ss,
        })
    }

    fn mean(&self, x: &Operator) -> f64 {
        (x * &self.rho_ss).trace().re
    }

    /// (ĉρ_ss + ρ_ssĉ†) split into its decaying part (1 − P)y and Tr[x̂ P y].
    fn input(&self, cop: &Operator, x: &Operator) -> (DVector<C64>, f64) {
        let y = vec(&(cop * &self.rho_ss + &self.rho_ss * cop.adjoint()));
        let py = &self.projector * &y;
        let n = self.lgen.dim();
        let persistent = (x * Operator::from_column_slice(n, n, py.as_slice()))
            .trace()
            .re;
        (y - py, persistent)
    }
}

/// Row vector r with r·vec(A) = Tr[x A].
fn trace_row(x: &Operator) -> DVector<C64> {
    vec(&x.transpose())
}

/// Uniform lag grid τ_k = k·dτ, k = 0..=steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub dtau: f64,
    pub steps: usize,
}

impl TauGrid {
    pub fn new(dtau: f64, steps: usize) -> Result<Self> {
        if !(dtau > 0.0) || steps < 2 {
            return Err(SmeError::InvalidParameter(format!(
                "τ grid needs dτ > 0 and ≥ 2 steps, got {dtau}, {steps}"
            )));
        }
        Ok(Self { dtau, steps })
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| k as f64 * self.dtau).collect()
    }
}

/// Structured part of a current correlation.
///
/// The full correlation is delta_weight·δ(τ) + r_tilde(τ) + dc_weight, where
/// r_tilde decays and dc_weight is the non-decaying covariance (across bath
/// sectors or a degenerate stationary manifold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub taus: Vec<f64>,
    pub r_tilde: Vec<f64>,
    /// dR̃/dτ at τ = 0, used for the endpoint correction of the half transform.
    pub slope0: f64,
    pub delta_weight: f64,
    pub dc_weight: f64,
    pub sector_mixed: bool,
}

impl CorrelationResult {
    pub fn at_zero(&self) -> f64 {
        self.r_tilde[0] + self.dc_weight
    }

    pub fn sup_norm(&self) -> f64 {
        self.r_tilde
            .iter()
            .fold(self.dc_weight.abs(), |m, v| m.max(v.abs()))
    }
}

/// Regression over a mixture of stationary sectors with detector rate 2ηκ.
#[derive(Debug, Clone)]
pub struct Regression {
    pub sectors: Vec<StationarySector>,
    /// 2ηκ
    pub rate: f64,
}

impl Regression {
    pub fn new(sectors: Vec<StationarySector>, eta_kappa: f64) -> Result<Self> {
        if sectors.is_empty() {
            return Err(SmeError::InvalidParameter(
                "regression needs at least one sector".into(),
            ));
        }
        let total: f64 = sectors.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-10 || sectors.iter().any(|s| s.weight < 0.0) {
            return Err(SmeError::InvalidParameter(format!(
                "sector weights sum to {total}"
            )));
        }
        Ok(Self {
            sectors,
            rate: 2.0 * eta_kappa,
        })
    }

    /// One stationary sector per bath sector of the reduced dynamics.
    pub fn from_dynamics(
        dynamics: &ReducedDynamics,
        sectors: &[ThetaSector],
        rho0: &DensityMatrix,
    ) -> Result<Self> {
        let secs = sectors
            .par_iter()
            .map(|s| StationarySector::new(s.weight, dynamics.generator(s.theta)?, rho0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(secs, dynamics.eta_kappa())
    }

    pub fn dim(&self) -> usize {
        self.sectors[0].lgen.dim()
    }

    /// Mixed stationary state Σ w ρ_ss.
    pub fn mixed_state(&self) -> Operator {
        let n = self.dim();
        self.sectors.iter().fold(Operator::zeros(n, n), |acc, s| {
            acc + &s.rho_ss * c(s.weight, 0.0)
        })
    }

    fn check(&self, ops: &[&Operator]) -> Result<()> {
        let n = self.dim();
        if ops.iter().any(|o| o.nrows() != n || !o.is_square()) {
            return Err(SmeError::Dimension(format!(
                "measurement operators must be {n}x{n}"
            )));
        }
        Ok(())
    }

    /// Covariance that never decays: Σ w Tr[x̂ P y] − ⟨x̂⟩⟨x̂_in⟩ with x̂_in = ĉ + ĉ†.
    fn dc(&self, cop: &Operator, x: &Operator) -> f64 {
        let x_in = cop + cop.adjoint();
        let mut persistent = 0.0;
        let (mut mx, mut mi) = (0.0, 0.0);
        for s in &self.sectors {
            persistent += s.weight * s.input(cop, x).1;
            mx += s.weight * s.mean(x);
            mi += s.weight * s.mean(&x_in);
        }
        self.rate * self.rate * (persistent - mx * mi)
    }

    /// (2ηκ)² Σ_s w_s Tr[x̂ e^{L_s τ}(1 − P_s)(ĉρ_ss + ρ_ssĉ†)] on a uniform lag grid.
    pub fn correlation(
        &self,
        cop: &Operator,
        x: &Operator,
        grid: TauGrid,
    ) -> Result<CorrelationResult> {
        self.check(&[cop, x])?;
        let row = trace_row(x);
        let pref = self.rate * self.rate;
        let mut r = vec![0.0; grid.steps + 1];
        let mut slope0 = 0.0;
        for s in &self.sectors {
            let (mut y, _) = s.input(cop, x);
            slope0 += s.weight * pref * row.dot(&(s.lgen.matrix() * &y)).re;
            let step = expm(&(s.lgen.matrix() * c(grid.dtau, 0.0)))?;
            for rk in r.iter_mut() {
                *rk += s.weight * pref * row.dot(&y).re;
                y = &step * y;
            }
        }
        Ok(CorrelationResult {
            taus: grid.taus(),
            r_tilde: r,
            slope0,
            delta_weight: self.rate,
            dc_weight: self.dc(cop, x),
            sector_mixed: self.sectors.len() > 1,
        })
    }

    /// 2 Re ∫₀^∞ e^{iωτ} R̃(τ) dτ for each ω, from −(L + iω − P)⁻¹(1 − P)y.
    pub fn resolvent(&self, cop: &Operator, x: &Operator, omegas: &[f64]) -> Result<Vec<f64>> {
        self.check(&[cop, x])?;
        let row = trace_row(x);
        let pref = self.rate * self.rate;
        let prepared: Vec<(f64, DMatrix<C64>, DVector<C64>)> = self
            .sectors
            .iter()
            .map(|s| (s.weight, s.lgen.matrix() - &s.projector, s.input(cop, x).0))
            .collect();
        omegas
            .par_iter()
            .map(|&w| {
                let mut acc = 0.0;
                for (weight, base, y) in &prepared {
                    let n2 = base.nrows();
                    let a = base + DMatrix::<C64>::identity(n2, n2) * (I * w);
                    let z = a.lu().solve(y).ok_or_else(|| {
                        SmeError::SteadyState(format!("singular resolvent at ω = {w}"))
                    })?;
                    acc += weight * pref * 2.0 * (-row.dot(&z)).re;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Spectrum of the current generated by ĉ, through the resolvent.
    pub fn spectrum(
        &self,
        cop: &Operator,
        omegas: &[f64],
        rescale: Rescale,
    ) -> Result<SpectrumResult> {
        let x = cop + cop.adjoint();
        let s = self
            .resolvent(cop, &x, omegas)?
            .into_iter()
            .map(|v| self.rate + v)
            .collect();
        Ok(SpectrumResult::new(
            omegas.to_vec(),
            s,
            self.rate,
            self.dc(cop, &x),
            rescale,
        ))
    }
}
