//! Two systems read out through one cavity, each dephasing in its own spin
//! bath, with the two baths correlated by a mixing parameter r.

use serde::{Deserialize, Serialize};

use super::regression::{CorrelationResult, Regression, StationarySector, TauGrid};
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, kron, Operator};
use crate::operator_core::state::DensityMatrix;
use crate::operator_core::superop::{liouvillian_build, Jump, Superoperator};
use crate::sme_engine::ReducedDynamics;
use crate::spin_bath::ThetaSector;

/// Joint bath sector (θ₁, θ₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSector {
    pub theta1: f64,
    pub theta2: f64,
    pub weight: f64,
}

/// With probability r both baths share one draw θ₁ = θ₂; otherwise the draws
/// are independent.
pub fn joint_sectors(s1: &[ThetaSector], s2: &[ThetaSector], r: f64) -> Result<Vec<JointSector>> {
    if !(0.0..=1.0).contains(&r) {
        return Err(SmeError::InvalidParameter(format!(
            "correlation r = {r} outside [0, 1]"
        )));
    }
    if r > 0.0 && s1 != s2 {
        return Err(SmeError::InvalidParameter(
            "correlated baths need identical sector sets".into(),
        ));
    }
    let mut out = Vec::new();
    for (i, a) in s1.iter().enumerate() {
        for (j, b) in s2.iter().enumerate() {
            let mut w = (1.0 - r) * a.weight * b.weight;
            if r > 0.0 && i == j {
                w += r * a.weight;
            }
            if w > 0.0 {
                out.push(JointSector {
                    theta1: a.theta,
                    theta2: b.theta,
                    weight: w,
                });
            }
        }
    }
    Ok(out)
}

/// Composite system 1 ⊗ 2 with local generators L₁ ⊗ 1 + 1 ⊗ L₂.
#[derive(Debug, Clone)]
pub struct PairModel {
    pub first: ReducedDynamics,
    pub second: ReducedDynamics,
}

fn lift(jumps: &[Jump], left: &Operator, right: &Operator) -> Vec<Jump> {
    jumps
        .iter()
        .map(|j| Jump::new(j.rate, kron(&kron(left, &j.op), right)))
        .collect()
}

impl PairModel {
    pub fn new(first: ReducedDynamics, second: ReducedDynamics) -> Result<Self> {
        if (first.eta_kappa() - second.eta_kappa()).abs() > 0.0 {
            return Err(SmeError::InvalidParameter(
                "both systems must share the cavity rate ηκ".into(),
            ));
        }
        Ok(Self { first, second })
    }

    pub fn dim(&self) -> usize {
        self.first.dim() * self.second.dim()
    }

    pub fn generator(&self, theta1: f64, theta2: f64) -> Result<Superoperator> {
        let i1 = algebra::identity(self.first.dim());
        let i2 = algebra::identity(self.second.dim());
        let one = algebra::identity(1);
        let h = kron(&self.first.hamiltonian(theta1), &i2)
            + kron(&i1, &self.second.hamiltonian(theta2));
        let mut jumps = lift(self.first.jumps(), &one, &i2);
        jumps.extend(lift(self.second.jumps(), &i1, &one));
        liouvillian_build(&h, &jumps)
    }

    /// (ĉ₁ ⊗ 1, 1 ⊗ ĉ₂)
    pub fn measurements(&self) -> (Operator, Operator) {
        let i1 = algebra::identity(self.first.dim());
        let i2 = algebra::identity(self.second.dim());
        (
            kron(self.first.measurement(), &i2),
            kron(&i1, self.second.measurement()),
        )
    }

    pub fn regression(
        &self,
        sectors: &[JointSector],
        rho1: &DensityMatrix,
        rho2: &DensityMatrix,
    ) -> Result<Regression> {
        let rho0 = DensityMatrix::new_unchecked(kron(rho1.as_op(), rho2.as_op()));
        let secs = sectors
            .iter()
            .map(|s| StationarySector::new(s.weight, self.generator(s.theta1, s.theta2)?, &rho0))
            .collect::<Result<Vec<_>>>()?;
        Regression::new(secs, self.first.eta_kappa())
    }
}

/// Autocorrelations of each current, their cross term, and the total.
#[derive(Debug, Clone)]
pub struct CrossCorrelation {
    pub r1: CorrelationResult,
    pub r2: CorrelationResult,
    /// R_c = R₁₂ + R₂₁
    pub rc: CorrelationResult,
    /// Correlation of the summed operator ĉ₁ + ĉ₂.
    pub total: CorrelationResult,
}

impl CrossCorrelation {
    /// max |R_total − (R₁ + R₂ + R_c)| over lags and the persistent part.
    pub fn additivity_defect(&self) -> f64 {
        let lag = (0..self.total.r_tilde.len())
            .map(|k| {
                (self.total.r_tilde[k]
                    - self.r1.r_tilde[k]
                    - self.r2.r_tilde[k]
                    - self.rc.r_tilde[k])
                    .abs()
            })
            .fold(0.0, f64::max);
        let dc = (self.total.dc_weight - self.r1.dc_weight - self.r2.dc_weight - self.rc.dc_weight)
            .abs();
        lag.max(dc)
    }
}

fn add(a: &CorrelationResult, b: &CorrelationResult) -> CorrelationResult {
    CorrelationResult {
        taus: a.taus.clone(),
        r_tilde: a
            .r_tilde
            .iter()
            .zip(&b.r_tilde)
            .map(|(x, y)| x + y)
            .collect(),
        slope0: a.slope0 + b.slope0,
        // cross terms of independent detector noises carry no δ
        delta_weight: 0.0,
        dc_weight: a.dc_weight + b.dc_weight,
        sector_mixed: a.sector_mixed,
    }
}

pub fn cross_correlation(
    reg: &Regression,
    c1: &Operator,
    c2: &Operator,
    grid: TauGrid,
) -> Result<CrossCorrelation> {
    let x1 = c1 + c1.adjoint();
    let x2 = c2 + c2.adjoint();
    let r1 = reg.correlation(c1, &x1, grid)?;
    let r2 = reg.correlation(c2, &x2, grid)?;
    let r12 = reg.correlation(c2, &x1, grid)?;
    let r21 = reg.correlation(c1, &x2, grid)?;
    let rc = add(&r12, &r21);
    let sum = c1 + c2;
    let total = reg.correlation(&sum, &(&sum + sum.adjoint()), grid)?;
    Ok(CrossCorrelation { r1, r2, rc, total })
}
