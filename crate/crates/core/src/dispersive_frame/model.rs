use serde::{Deserialize, Serialize};

use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, c, Operator, C64, I};

/// Detector efficiency η ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Efficiency(f64);

impl Efficiency {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(SmeError::InvalidParameter(format!(
                "efficiency η = {eta} outside [0, 1]"
            )));
        }
        Ok(Self(eta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Efficiency {
    type Error = SmeError;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Efficiency> for f64 {
    fn from(e: Efficiency) -> f64 {
        e.0
    }
}

/// Cavity leak rate κ > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LeakRate(f64);

impl LeakRate {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(SmeError::InvalidParameter(format!(
                "leak rate κ = {kappa} must be positive"
            )));
        }
        Ok(Self(kappa))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for LeakRate {
    type Error = SmeError;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LeakRate> for f64 {
    fn from(k: LeakRate) -> f64 {
        k.0
    }
}

/// Cavity drive, leakage and detection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub omega_c: f64,
    pub omega_p: f64,
    pub xi: C64,
    pub kappa: LeakRate,
    pub eta: Efficiency,
    pub phi: f64,
    pub delta: f64,
    /// Displaced cavity amplitude; `None` means ξ/(iκ).
    pub alpha: Option<C64>,
}

impl DriveParams {
    /// ξ/(iκ), the bare-cavity coherent amplitude for a resonant drive.
    pub fn alpha_from_drive(&self) -> C64 {
        self.xi / (I * self.kappa.get())
    }

    pub fn alpha(&self) -> C64 {
        self.alpha.unwrap_or_else(|| self.alpha_from_drive())
    }
}

/// Numerical thresholds of the frame construction and its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameSettings {
    pub resonance_floor: f64,
    pub dispersive_threshold: f64,
    pub epsilon_warning: f64,
}

impl Default for FrameSettings {
    fn default() -> Self {
        Self {
            resonance_floor: 1e-6,
            dispersive_threshold: 0.2,
            epsilon_warning: 0.15,
        }
    }
}

/// System, couplings and cavity parameters.
///
/// `h_field` is an extra system Hamiltonian (a classical tuning field) that
/// enters the dynamics but not the dispersive transformation.
#[derive(Debug, Clone)]
pub struct SystemModel {
    h_s: Operator,
    lambda: Operator,
    s_op: Operator,
    h_field: Operator,
    pub drive: DriveParams,
}

impl SystemModel {
    pub fn new(
        h_s: Operator,
        lambda: Operator,
        s_op: Operator,
        drive: DriveParams,
    ) -> Result<Self> {
        let n = h_s.nrows();
        for (name, op) in [("H_S", &h_s), ("λ", &lambda), ("S", &s_op)] {
            if !op.is_square() || op.nrows() != n {
                return Err(SmeError::Dimension(format!("{name} must be {n}x{n}")));
            }
            if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(SmeError::InvalidParameter(format!(
                    "{name} has non-finite entries"
                )));
            }
            if !algebra::is_hermitian(op) {
                return Err(SmeError::NotHermitian(algebra::hermiticity_defect(op)));
            }
        }
        Ok(Self {
            h_s,
            lambda,
            s_op,
            h_field: algebra::zeros(n),
            drive,
        })
    }

    /// Two-level system H_S = Ω₁|1⟩⟨1| + Ω₂|2⟩⟨2| with λ = γσ_x and S = σ_z.
    pub fn qubit(omega_1: f64, omega_2: f64, gamma: f64, drive: DriveParams) -> Result<Self> {
        Self::new(
            algebra::diag(&[omega_1, omega_2]),
            algebra::sigma_x() * c(gamma, 0.0),
            algebra::sigma_z(),
            drive,
        )
    }

    /// Add a classical field −(Ω_f/2)σ_z, which moves the gap E₂ − E₁ by +Ω_f.
    pub fn with_tuning_field(mut self, omega_f: f64) -> Result<Self> {
        if self.dim() != 2 {
            return Err(SmeError::Dimension(
                "tuning field needs a two-level system".into(),
            ));
        }
        self.h_field = algebra::sigma_z() * c(-0.5 * omega_f, 0.0);
        Ok(self)
    }

    pub fn with_field_hamiltonian(mut self, h: Operator) -> Result<Self> {
        if h.nrows() != self.dim() || !algebra::is_hermitian(&h) {
            return Err(SmeError::InvalidParameter(
                "field Hamiltonian must be Hermitian and match H_S".into(),
            ));
        }
        self.h_field = h;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.h_s.nrows()
    }

    pub fn h_s(&self) -> &Operator {
        &self.h_s
    }

    pub fn lambda(&self) -> &Operator {
        &self.lambda
    }

    pub fn s_op(&self) -> &Operator {
        &self.s_op
    }

    pub fn h_field(&self) -> &Operator {
        &self.h_field
    }

    pub fn kappa(&self) -> f64 {
        self.drive.kappa.get()
    }

    pub fn eta(&self) -> f64 {
        self.drive.eta.get()
    }

    pub fn alpha(&self) -> C64 {
        self.drive.alpha()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newtypes_validate() {
        assert!(Efficiency::new(1.2).is_err());
        assert!(Efficiency::new(0.0).is_ok());
        assert!(LeakRate::new(0.0).is_err());
        assert!(serde_json::from_str::<Efficiency>("-0.1").is_err());
        assert_eq!(
            serde_json::from_str::<LeakRate>("10.0").unwrap().get(),
            10.0
        );
    }

    #[test]
    fn default_alpha_from_drive() {
        let d = DriveParams {
            omega_c: 30.0,
            omega_p: 30.0,
            xi: c(10.0, 0.0),
            kappa: LeakRate::new(10.0).unwrap(),
            eta: Efficiency::new(1.0).unwrap(),
            phi: 0.0,
            delta: 0.0,
            alpha: None,
        };
        assert!((d.alpha() - c(0.0, -1.0)).norm() < 1e-15);
        let over = DriveParams {
            alpha: Some(c(1.0, 0.0)),
            ..d
        };
        assert_eq!(over.alpha(), c(1.0, 0.0));
    }

    #[test]
    fn model_rejects_non_hermitian_coupling() {
        let d = DriveParams {
            omega_c: 1.0,
            omega_p: 1.0,
            xi: c(0.0, 0.0),
            kappa: LeakRate::new(1.0).unwrap(),
            eta: Efficiency::new(1.0).unwrap(),
            phi: 0.0,
            delta: 0.0,
            alpha: None,
        };
        let r = SystemModel::new(
            algebra::zeros(2),
            algebra::sigma_minus(),
            algebra::sigma_z(),
            d,
        );
        assert!(matches!(r, Err(SmeError::NotHermitian(_))));
    }
}
