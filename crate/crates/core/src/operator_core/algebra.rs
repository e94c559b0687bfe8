//! Dense complex operator algebra.
//!
//! Operators are plain `DMatrix<Complex64>` values. Qubit helpers follow the
//! project-wide level convention: index 0 is the lower level |1⟩, index 1 the
//! upper level |2⟩, and σ_z = diag(+1, −1), so |1⟩ is the +1 eigenstate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SmeError};

pub type C64 = Complex64;
pub type Operator = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerance of the Hermiticity predicate, relative to max(1, max|A_ij|).
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> Operator {
    Operator::identity(n, n)
}

pub fn zeros(n: usize) -> Operator {
    Operator::zeros(n, n)
}

pub fn from_real_rows(rows: &[&[f64]]) -> Operator {
    let n = rows.len();
    Operator::from_fn(n, rows[0].len(), |i, j| c(rows[i][j], 0.0))
}

pub fn diag(values: &[f64]) -> Operator {
    let n = values.len();
    Operator::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn sigma_x() -> Operator {
    from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y() -> Operator {
    Operator::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> Operator {
    diag(&[1.0, -1.0])
}

/// |1⟩⟨2|: takes the upper level to the lower one.
pub fn sigma_minus() -> Operator {
    from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

pub fn projector(n: usize, k: usize) -> Operator {
    Operator::from_fn(n, n, |i, j| if i == k && j == k { ONE } else { ZERO })
}

pub fn dagger(a: &Operator) -> Operator {
    a.adjoint()
}

fn check_square_pair(a: &Operator, b: &Operator, what: &str) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.nrows() != b.nrows() {
        return Err(SmeError::Dimension(format!(
            "{what}: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_square_pair(a, b, "commutator")?;
    Ok(a * b - b * a)
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_square_pair(a, b, "anticommutator")?;
    Ok(a * b + b * a)
}

/// Kronecker product, (A ⊗ B)[(i·p + k), (j·q + l)] = A[i,j]·B[k,l].
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

/// Trace out factor `traced` of a tensor product with factor dimensions `dims`.
pub fn partial_trace(rho: &Operator, dims: &[usize], traced: usize) -> Result<Operator> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.nrows() != total {
        return Err(SmeError::Dimension(format!(
            "partial_trace: operator is {}x{}, factors multiply to {total}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    if traced >= dims.len() {
        return Err(SmeError::Dimension(format!(
            "partial_trace: factor {traced} out of {}",
            dims.len()
        )));
    }
    let d = dims[traced];
    let inner: usize = dims[traced + 1..].iter().product();
    let outer: usize = dims[..traced].iter().product();
    let keep = outer * inner;
    let mut out = zeros(keep);
    for o1 in 0..outer {
        for i1 in 0..inner {
            for o2 in 0..outer {
                for i2 in 0..inner {
                    let mut acc = ZERO;
                    for k in 0..d {
                        acc += rho[((o1 * d + k) * inner + i1, (o2 * d + k) * inner + i2)];
                    }
                    out[(o1 * inner + i1, o2 * inner + i2)] = acc;
                }
            }
        }
    }
    Ok(out)
}

pub fn trace(a: &Operator) -> C64 {
    a.trace()
}

/// max |A_ij|
pub fn sup_norm(a: &Operator) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn hermiticity_defect(a: &Operator) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(a: &Operator) -> bool {
    hermiticity_defect(a) <= HERMITIAN_TOL * sup_norm(a).max(1.0)
}

/// (A + A†)/2
pub fn hermitian_part(a: &Operator) -> Operator {
    (a + a.adjoint()) * c(0.5, 0.0)
}

pub fn singular_values(a: &Operator) -> Vec<f64> {
    a.clone().singular_values().iter().copied().collect()
}

/// Largest singular value.
pub fn spectral_norm(a: &Operator) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(a: &Operator) -> f64 {
    singular_values(a).into_iter().sum()
}

pub fn trace_distance(a: &Operator, b: &Operator) -> Result<f64> {
    check_square_pair(a, b, "trace_distance")?;
    Ok(0.5 * trace_norm(&(a - b)))
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(a: &Operator) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigen-decomposition of a Hermitian operator: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(a: &Operator) -> (Vec<f64>, Operator) {
    let eig = hermitian_part(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Operator::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}
