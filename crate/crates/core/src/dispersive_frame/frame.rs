use serde::{Deserialize, Serialize};

use super::model::{FrameSettings, SystemModel};
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, c, Operator, C64, ZERO};
use crate::operator_core::superop::dissipator_apply;

/// Operators of the dispersive frame plus the bad-cavity diagnostics.
#[derive(Debug, Clone)]
pub struct DispersiveFrame {
    pub x: Operator,
    pub h_sd: Operator,
    pub o_s: Operator,
    /// Λ = ½[X†, X]
    pub lambda_op: Operator,
    pub s_tilde: Operator,
    pub q: Operator,
    /// −[X†, S], multiplies the cavity annihilation operator.
    pub g_minus: Operator,
    /// [X, S], multiplies the cavity creation operator.
    pub g_plus: Operator,
    pub epsilon: f64,
    pub bad_cavity_margin: f64,
}

impl DispersiveFrame {
    /// G with the cavity operator replaced by the amplitude α.
    pub fn g_at(&self, alpha: C64) -> Operator {
        &self.g_minus * alpha + &self.g_plus * alpha.conj()
    }
}

/// Eigenbasis of H_S. Diagonal input is used as-is so no rounding enters.
struct Eigenbasis {
    energies: Vec<f64>,
    vectors: Option<Operator>,
}

impl Eigenbasis {
    fn of(h: &Operator) -> Self {
        let n = h.nrows();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h[(i, j)] == ZERO));
        if diagonal {
            Self {
                energies: (0..n).map(|i| h[(i, i)].re).collect(),
                vectors: None,
            }
        } else {
            let (energies, v) = algebra::hermitian_eigen(h);
            Self {
                energies,
                vectors: Some(v),
            }
        }
    }

    fn to_eigen(&self, a: &Operator) -> Operator {
        match &self.vectors {
            None => a.clone(),
            Some(v) => v.adjoint() * a * v,
        }
    }

    fn to_original(&self, a: &Operator) -> Operator {
        match &self.vectors {
            None => a.clone(),
            Some(v) => v * a * v.adjoint(),
        }
    }
}

fn coupling_is_zero(value: C64, scale: f64) -> bool {
    value.norm() <= 1e-14 * scale
}

/// X = Σ_jk λ_jk / (ω_c − (Ω_k − Ω_j)) |j⟩⟨k| in the input basis.
pub fn build_x(model: &SystemModel, settings: &FrameSettings) -> Result<Operator> {
    let basis = Eigenbasis::of(model.h_s());
    let lam = basis.to_eigen(model.lambda());
    let scale = algebra::sup_norm(model.lambda()).max(1.0);
    let n = model.dim();
    let wc = model.drive.omega_c;
    let mut x = algebra::zeros(n);
    for j in 0..n {
        for k in 0..n {
            let l = lam[(j, k)];
            if coupling_is_zero(l, scale) {
                continue;
            }
            let den = wc - (basis.energies[k] - basis.energies[j]);
            if den.abs() < settings.resonance_floor {
                return Err(SmeError::Resonant {
                    j: j + 1,
                    k: k + 1,
                    denominator: den.abs(),
                });
            }
            x[(j, k)] = l / den;
        }
    }
    Ok(basis.to_original(&x))
}

pub fn build_frame(model: &SystemModel, settings: &FrameSettings) -> Result<DispersiveFrame> {
    let x = build_x(model, settings)?;
    let xd = x.adjoint();
    let lam = model.lambda();
    let s = model.s_op();
    let half = c(0.5, 0.0);

    let h_sd = model.h_s() - (&xd * lam + lam * &x) * half;
    let o_s = algebra::hermitian_part(&(algebra::commutator(lam, &(&xd - &x))? * half));
    let lambda_op = algebra::hermitian_part(&(algebra::commutator(&xd, &x)? * half));
    let xdx = &xd * &x;
    let s_tilde =
        algebra::hermitian_part(&(s - algebra::anticommutator(&xdx, s)? * half + &xd * s * &x));
    let q = dissipator_apply(&x, s)? + dissipator_apply(&xd, s)?;
    let g_minus = -algebra::commutator(&xd, s)?;
    let g_plus = algebra::commutator(&x, s)?;

    let alpha2 = model.alpha().norm_sqr();
    let kappa = model.kappa();
    let epsilon = (algebra::spectral_norm(&o_s) + model.drive.delta.abs()) * (1.0 + alpha2) / kappa;
    let bad_cavity_margin = kappa - algebra::trace_norm(&o_s) * (1.0 + alpha2);

    Ok(DispersiveFrame {
        x,
        h_sd: algebra::hermitian_part(&h_sd),
        o_s,
        lambda_op,
        s_tilde,
        q,
        g_minus,
        g_plus,
        epsilon,
        bad_cavity_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub j: usize,
    pub k: usize,
    pub ratio: f64,
}

/// Diagnostics of the dispersive and bad-cavity approximations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub ratios: Vec<PairRatio>,
    pub max_ratio: f64,
    pub dispersive_threshold: f64,
    pub dispersive_ok: bool,
    pub epsilon: f64,
    pub epsilon_warning: f64,
    pub epsilon_ok: bool,
    pub bad_cavity_margin: f64,
    pub bad_cavity_ok: bool,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.dispersive_ok && self.epsilon_ok && self.bad_cavity_ok
    }

    /// Error naming the first violated criterion.
    pub fn ensure(&self) -> Result<()> {
        if !self.dispersive_ok {
            return Err(SmeError::Validity(format!(
                "dispersive condition: max |λ_jk|/|ω_c − (Ω_k − Ω_j)| = {:.4} ≥ {}",
                self.max_ratio, self.dispersive_threshold
            )));
        }
        if !self.bad_cavity_ok {
            return Err(SmeError::Validity(format!(
                "bad-cavity criterion: κ − ‖O_S‖₁(1 + |α|²) = {:.4} ≤ 0",
                self.bad_cavity_margin
            )));
        }
        if !self.epsilon_ok {
            return Err(SmeError::Validity(format!(
                "perturbative parameter ε = {:.4} ≥ {}",
                self.epsilon, self.epsilon_warning
            )));
        }
        Ok(())
    }
}

pub fn validity_report(
    frame: &DispersiveFrame,
    model: &SystemModel,
    settings: &FrameSettings,
) -> ValidityReport {
    let basis = Eigenbasis::of(model.h_s());
    let lam = basis.to_eigen(model.lambda());
    let scale = algebra::sup_norm(model.lambda()).max(1.0);
    let n = model.dim();
    let mut ratios = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let l = lam[(j, k)];
            if coupling_is_zero(l, scale) {
                continue;
            }
            let den = (model.drive.omega_c - (basis.energies[k] - basis.energies[j])).abs();
            ratios.push(PairRatio {
                j: j + 1,
                k: k + 1,
                ratio: l.norm() / den,
            });
        }
    }
    let max_ratio = ratios.iter().map(|r| r.ratio).fold(0.0, f64::max);
    ValidityReport {
        dispersive_ok: max_ratio < settings.dispersive_threshold,
        max_ratio,
        ratios,
        dispersive_threshold: settings.dispersive_threshold,
        epsilon: frame.epsilon,
        epsilon_warning: settings.epsilon_warning,
        epsilon_ok: frame.epsilon < settings.epsilon_warning,
        bad_cavity_margin: frame.bad_cavity_margin,
        bad_cavity_ok: frame.bad_cavity_margin > 0.0,
    }
}
