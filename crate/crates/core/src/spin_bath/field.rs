use super::bath::BathSpec;
use crate::dispersive_frame::SystemModel;
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::ZERO;

/// ⟨Σ g_k σ_Z^k⟩ in the initial ensemble (|1⟩ is the +1 eigenstate).
pub fn bath_mean(spec: &BathSpec) -> Result<f64> {
    spec.validate()?;
    Ok(match spec {
        BathSpec::Discrete { g, a, .. } => g.iter().zip(a).map(|(g, a)| g * (2.0 * a - 1.0)).sum(),
        _ => 0.0,
    })
}

/// Tuning field Ω_f that recentres the dressed two-level gap:
///
/// Ω_f = Ω₁ − Ω₂ − |α|²γ²/d − ⟨Σ g σ_Z⟩ − ½(ξα* + ξ*α)(γ/d)² − |α|²γ²/d,
/// d = Ω₂ − Ω₁ − ω_c, with λ = γσ_x. Both |α|²γ²/d terms are kept.
pub fn field_strength(model: &SystemModel, spec: &BathSpec) -> Result<f64> {
    if model.dim() != 2 {
        return Err(SmeError::Dimension(
            "field_strength needs a two-level system".into(),
        ));
    }
    let h = model.h_s();
    if h[(0, 1)] != ZERO || h[(1, 0)] != ZERO {
        return Err(SmeError::InvalidParameter(
            "field_strength needs H_S diagonal in the level basis".into(),
        ));
    }
    let lam = model.lambda();
    let gamma = lam[(0, 1)].re;
    if lam[(0, 0)] != ZERO || lam[(1, 1)] != ZERO || lam[(0, 1)].im != 0.0 {
        return Err(SmeError::InvalidParameter(
            "field_strength needs λ = γσ_x".into(),
        ));
    }
    let (o1, o2) = (h[(0, 0)].re, h[(1, 1)].re);
    let d = o2 - o1 - model.drive.omega_c;
    if d == 0.0 {
        return Err(SmeError::Resonant {
            j: 1,
            k: 2,
            denominator: 0.0,
        });
    }
    let alpha = model.alpha();
    let a2 = alpha.norm_sqr();
    let xi = model.drive.xi;
    let drive = (xi * alpha.conj() + xi.conj() * alpha).re;
    Ok(o1
        - o2
        - a2 * gamma * gamma / d
        - bath_mean(spec)?
        - 0.5 * drive * (gamma / d).powi(2)
        - a2 * gamma * gamma / d)
}
