use serde::{Deserialize, Serialize};

use super::algebra::{self, c, Operator, C64};
use crate::error::{Result, SmeError};

pub const HERMITIAN_STATE_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Finite-dt stochastic integration can dip slightly below zero; documented, not clamped.
pub const PSD_TOL: f64 = -1e-8;

/// A validated density matrix: Hermitian, unit trace, (numerically) positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_square() {
            return Err(SmeError::Dimension("density matrix must be square".into()));
        }
        if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SmeError::InvalidParameter(
                "non-finite density matrix entry".into(),
            ));
        }
        let h = algebra::hermiticity_defect(&op);
        if h > HERMITIAN_STATE_TOL {
            return Err(SmeError::NotHermitian(h));
        }
        let tr = op.trace();
        if (tr - algebra::ONE).norm() > TRACE_TOL {
            return Err(SmeError::NonUnitTrace(tr.re));
        }
        let min = algebra::hermitian_eigenvalues(&op)[0];
        if min < PSD_TOL {
            return Err(SmeError::InvalidParameter(format!(
                "density matrix has eigenvalue {min:.3e} below tolerance"
            )));
        }
        Ok(Self(op))
    }

    /// Wrap without validation; for states produced by trusted propagation.
    pub fn new_unchecked(op: Operator) -> Self {
        Self(op)
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(SmeError::InvalidParameter("zero state vector".into()));
        }
        let n = psi.len();
        let op = Operator::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(op)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(algebra::identity(n) * c(1.0 / n as f64, 0.0))
    }

    pub fn basis(n: usize, k: usize) -> Self {
        Self(algebra::projector(n, k))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_op(&self) -> &Operator {
        &self.0
    }

    pub fn into_op(self) -> Operator {
        self.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        algebra::hermitian_eigenvalues(&self.0)[0]
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn expectation(&self, a: &Operator) -> C64 {
        (a * &self.0).trace()
    }

    /// Project onto the PSD cone (clip negative eigenvalues) and renormalise.
    pub fn clamp_psd(&self) -> Self {
        let (vals, vecs) = algebra::hermitian_eigen(&self.0);
        let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let d = algebra::diag(&clipped);
        let op = &vecs * d * vecs.adjoint() * c(1.0 / total, 0.0);
        Self(algebra::hermitian_part(&op))
    }
}

/// Named initial states accepted by configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// (|1⟩ + |2⟩)/√2 on every qubit factor.
    #[default]
    Plus,
    Ground,
    Excited,
    MaximallyMixed,
}

impl InitialState {
    pub fn qubit(self) -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            InitialState::Plus => DensityMatrix::pure(&[c(h, 0.0), c(h, 0.0)]).unwrap(),
            InitialState::Ground => DensityMatrix::basis(2, 0),
            InitialState::Excited => DensityMatrix::basis(2, 1),
            InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(2),
        }
    }

    /// Product state over `n_qubits` factors.
    pub fn product(self, n_qubits: usize) -> DensityMatrix {
        let one = self.qubit().into_op();
        let mut op = one.clone();
        for _ in 1..n_qubits {
            op = algebra::kron(&op, &one);
        }
        DensityMatrix::new_unchecked(op)
    }
}
