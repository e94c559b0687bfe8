//! Superoperators on column-stacked density matrices.
//!
//! vec(ρ) stacks columns, so vec(A X B) = (Bᵀ ⊗ A) vec(X). nalgebra stores
//! matrices column-major, which makes `vec`/`unvec` plain reinterpretations of
//! the storage and therefore exact round-trips.

use nalgebra::{DMatrix, DVector};

use super::algebra::{self, c, Operator, C64, I, ONE, ZERO};
use crate::error::{Result, SmeError};

/// Tolerance on the trace-preservation row vec(I)†·L.
pub const TRACE_PRESERVATION_TOL: f64 = 1e-10;

pub fn vec(op: &Operator) -> DVector<C64> {
    DVector::from_column_slice(op.as_slice())
}

pub fn unvec(v: &DVector<C64>, n: usize) -> Result<Operator> {
    if v.len() != n * n {
        return Err(SmeError::Dimension(format!(
            "unvec: vector of length {} is not {n}²",
            v.len()
        )));
    }
    Ok(Operator::from_column_slice(n, n, v.as_slice()))
}

/// Generator or map acting on vec(ρ) for n×n operators ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: DMatrix<C64>,
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            mat: DMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn from_matrix(dim: usize, mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(SmeError::Dimension(format!(
                "superoperator for dim {dim} must be {}x{}",
                dim * dim,
                dim * dim
            )));
        }
        Ok(Self { dim, mat })
    }

    /// Operator dimension n (the matrix is n²×n²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(SmeError::Dimension(format!(
                "superoperator of dim {} applied to {}x{}",
                self.dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        unvec(&(&self.mat * vec(rho)), self.dim)
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        if other.dim != self.dim {
            return Err(SmeError::Dimension("superoperator sum".into()));
        }
        Ok(Self {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn scaled(&self, s: f64) -> Superoperator {
        Self {
            dim: self.dim,
            mat: &self.mat * c(s, 0.0),
        }
    }

    /// max_j |(vec(I)† L)_j|; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for col in 0..n * n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += self.mat[(k * n + k, col)];
            }
            worst = worst.max(acc.norm());
        }
        worst
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_defect() <= TRACE_PRESERVATION_TOL * self.sup_norm().max(1.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// vec(Aρ) = (I ⊗ A) vec(ρ)
pub fn left_mul(a: &Operator) -> DMatrix<C64> {
    algebra::identity(a.nrows()).kronecker(a)
}

/// vec(ρB) = (Bᵀ ⊗ I) vec(ρ)
pub fn right_mul(b: &Operator) -> DMatrix<C64> {
    b.transpose().kronecker(&algebra::identity(b.nrows()))
}

/// Matrix of ρ ↦ −i[H, ρ].
pub fn hamiltonian_superop(h: &Operator) -> DMatrix<C64> {
    (left_mul(h) - right_mul(h)) * (-I)
}

/// Matrix of ρ ↦ D[L]ρ = LρL† − ½{L†L, ρ}.
pub fn dissipator_superop(l: &Operator) -> DMatrix<C64> {
    let ldl = l.adjoint() * l;
    // vec(LρL†) = (conj(L) ⊗ L) vec ρ
    l.conjugate().kronecker(l) - (left_mul(&ldl) + right_mul(&ldl)) * c(0.5, 0.0)
}

/// D[X]ρ = XρX† − ½{X†X, ρ}
pub fn dissipator_apply(x: &Operator, rho: &Operator) -> Result<Operator> {
    if !x.is_square() || x.nrows() != rho.nrows() || !rho.is_square() {
        return Err(SmeError::Dimension("dissipator_apply".into()));
    }
    let xd = x.adjoint();
    let xdx = &xd * x;
    Ok(x * rho * &xd - (&xdx * rho + rho * &xdx) * c(0.5, 0.0))
}

/// Tolerance on Tr ρ for the measurement superoperator.
pub const MEAS_TRACE_TOL: f64 = 1e-8;

/// 𝓗[c]ρ = cρ + ρc† − Tr[(c + c†)ρ] ρ
pub fn meas_superop_apply(cop: &Operator, rho: &Operator) -> Result<Operator> {
    if !cop.is_square() || cop.nrows() != rho.nrows() || !rho.is_square() {
        return Err(SmeError::Dimension("meas_superop_apply".into()));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > MEAS_TRACE_TOL {
        return Err(SmeError::NonUnitTrace(tr.re));
    }
    Ok(meas_superop_unchecked(cop, rho))
}

pub(crate) fn meas_superop_unchecked(cop: &Operator, rho: &Operator) -> Operator {
    let a = cop * rho;
    let b = rho * cop.adjoint();
    let mean = a.trace() + b.trace();
    a + b - rho * mean
}

/// A dissipative channel rate·D[L].
#[derive(Debug, Clone)]
pub struct Jump {
    pub rate: f64,
    pub op: Operator,
}

impl Jump {
    pub fn new(rate: f64, op: Operator) -> Self {
        Self { rate, op }
    }
}

/// Generator of ρ ↦ −i[H, ρ] + Σ rate·D[L]ρ.
pub fn liouvillian_build(h: &Operator, jumps: &[Jump]) -> Result<Superoperator> {
    if !h.is_square() {
        return Err(SmeError::Dimension("Hamiltonian must be square".into()));
    }
    if !algebra::is_hermitian(h) {
        return Err(SmeError::NotHermitian(algebra::hermiticity_defect(h)));
    }
    let n = h.nrows();
    let mut mat = hamiltonian_superop(h);
    for j in jumps {
        if j.rate < 0.0 || !j.rate.is_finite() {
            return Err(SmeError::NegativeRate(j.rate));
        }
        if j.op.nrows() != n || !j.op.is_square() {
            return Err(SmeError::Dimension("jump operator dimension".into()));
        }
        if j.rate > 0.0 {
            mat += dissipator_superop(&j.op) * c(j.rate, 0.0);
        }
    }
    Superoperator::from_matrix(n, mat)
}
