use crate::dispersive_frame::{DispersiveFrame, SystemModel};
use crate::error::Result;
use crate::operator_core::algebra::{self, c, Operator, C64, I};
use crate::operator_core::superop::{liouvillian_build, Jump, Superoperator};

/// m = (α/(κ + iΔ))(i(1 + Λ) + κΛ²)e^{−iφ}, without the √(2ηκ) prefactor.
pub fn measurement_operator(model: &SystemModel, frame: &DispersiveFrame) -> Operator {
    let kappa = model.kappa();
    let d = model.dim();
    let lam = &frame.lambda_op;
    let pref = model.alpha() / c(kappa, model.drive.delta) * C64::from_polar(1.0, -model.drive.phi);
    ((algebra::identity(d) + lam) * I + lam * lam * c(kappa, 0.0)) * pref
}

/// Sector-resolved generator of the reduced system after cavity elimination.
///
/// H_θ = H_S^D + H_field + θ S_eff + |α|²O_S + (ξα* + ξ*α)Λ − Δ|α|²/(κ² + Δ²) O_S²
/// with jumps κD[X] and κ|α|²/(κ² + Δ²) D[O_S]. S_eff is S̃, plus
/// |α|²Q + G_−α + G_+α* when the cavity operators in the bath coupling are
/// replaced by the amplitude α.
#[derive(Debug, Clone)]
pub struct ReducedDynamics {
    h_base: Operator,
    s_eff: Operator,
    jumps: Vec<Jump>,
    meas: Operator,
    eta_kappa: f64,
}

impl ReducedDynamics {
    pub fn new(
        model: &SystemModel,
        frame: &DispersiveFrame,
        include_alpha_corrections: bool,
    ) -> Self {
        let kappa = model.kappa();
        let delta = model.drive.delta;
        let alpha = model.alpha();
        let a2 = alpha.norm_sqr();
        let xi = model.drive.xi;
        let drive = (xi * alpha.conj() + xi.conj() * alpha).re;
        let lorentz = kappa * kappa + delta * delta;

        let o2 = &frame.o_s * &frame.o_s;
        let h_base = &frame.h_sd
            + model.h_field()
            + &frame.o_s * c(a2, 0.0)
            + &frame.lambda_op * c(drive, 0.0)
            - o2 * c(delta * a2 / lorentz, 0.0);

        let mut s_eff = frame.s_tilde.clone();
        if include_alpha_corrections {
            s_eff += &frame.q * c(a2, 0.0) + frame.g_at(alpha);
        }

        let jumps = vec![
            Jump::new(kappa, frame.x.clone()),
            Jump::new(kappa * a2 / lorentz, frame.o_s.clone()),
        ];
        Self {
            h_base: algebra::hermitian_part(&h_base),
            s_eff: algebra::hermitian_part(&s_eff),
            jumps,
            meas: measurement_operator(model, frame),
            eta_kappa: model.eta() * kappa,
        }
    }

    pub fn dim(&self) -> usize {
        self.h_base.nrows()
    }

    pub fn hamiltonian(&self, theta: f64) -> Operator {
        &self.h_base + &self.s_eff * c(theta, 0.0)
    }

    /// Effective bath coupling multiplying θ.
    pub fn s_eff(&self) -> &Operator {
        &self.s_eff
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn generator(&self, theta: f64) -> Result<Superoperator> {
        liouvillian_build(&self.hamiltonian(theta), &self.jumps)
    }

    pub fn measurement(&self) -> &Operator {
        &self.meas
    }

    /// ηκ; the innovation strength is √(2ηκ).
    pub fn eta_kappa(&self) -> f64 {
        self.eta_kappa
    }
}
