use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmeError};

pub const MAX_ENUMERATED_SPINS: usize = 20;
/// Sectors whose θ differ by less than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// Time scaling of the Gaussian dephasing exponent: V·t^p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub enum DephasingClass {
    Linear,
    ThreeHalves,
    Quadratic,
}

impl DephasingClass {
    pub fn exponent(self) -> f64 {
        match self {
            DephasingClass::Linear => 1.0,
            DephasingClass::ThreeHalves => 1.5,
            DephasingClass::Quadratic => 2.0,
        }
    }
}

impl TryFrom<f64> for DephasingClass {
    type Error = SmeError;
    fn try_from(p: f64) -> Result<Self> {
        [
            DephasingClass::Linear,
            DephasingClass::ThreeHalves,
            DephasingClass::Quadratic,
        ]
        .into_iter()
        .find(|c| c.exponent() == p)
        .ok_or_else(|| {
            SmeError::InvalidParameter(format!("dephasing exponent p = {p}; expected 1, 1.5 or 2"))
        })
    }
}

impl From<DephasingClass> for f64 {
    fn from(c: DephasingClass) -> f64 {
        c.exponent()
    }
}

/// Initial ensemble of the spin environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathSpec {
    /// Product of diagonal spin states; spin k is in |1⟩ with probability a[k].
    Discrete {
        g: Vec<f64>,
        a: Vec<f64>,
        /// Spin frequencies; they commute with everything and never enter the reduced dynamics.
        #[serde(default)]
        omega: Vec<f64>,
    },
    GaussianStatic {
        v: f64,
    },
    GaussianScaled {
        v: f64,
        p: DephasingClass,
    },
}

impl BathSpec {
    pub fn single_spin(g: f64, a: f64) -> Self {
        BathSpec::Discrete {
            g: vec![g],
            a: vec![a],
            omega: vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BathSpec::Discrete { g, a, omega } => {
                if g.len() != a.len() || (!omega.is_empty() && omega.len() != g.len()) {
                    return Err(SmeError::InvalidParameter(
                        "bath vectors g, a, omega differ in length".into(),
                    ));
                }
                if let Some(bad) = a.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return Err(SmeError::InvalidParameter(format!(
                        "ground population {bad} outside [0, 1]"
                    )));
                }
                if g.iter().chain(omega.iter()).any(|x| !x.is_finite()) {
                    return Err(SmeError::InvalidParameter(
                        "non-finite bath parameter".into(),
                    ));
                }
                Ok(())
            }
            BathSpec::GaussianStatic { v } | BathSpec::GaussianScaled { v, .. } => {
                if !(*v > 0.0) || !v.is_finite() {
                    return Err(SmeError::InvalidParameter(format!(
                        "width V = {v} must be positive"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_gaussian(&self) -> bool {
        !matches!(self, BathSpec::Discrete { .. })
    }

    /// Variance of θ for a Gaussian ensemble at time `t` (frozen at t_ref for spectra).
    pub fn gaussian_variance(&self, t: f64) -> Result<f64> {
        match self {
            BathSpec::Discrete { .. } => Err(SmeError::InvalidParameter(
                "discrete bath has no Gaussian width".into(),
            )),
            BathSpec::GaussianStatic { v } => Ok(v / 2.0),
            BathSpec::GaussianScaled { v, p } => match p {
                DephasingClass::Quadratic => Ok(v / 2.0),
                _ if !(t > 0.0) => Err(SmeError::InvalidParameter(format!(
                    "time-dependent width needs t_ref > 0, got {t}"
                ))),
                DephasingClass::Linear => Ok(v / (2.0 * t)),
                DephasingClass::ThreeHalves => Ok(v / (2.0 * t.sqrt())),
            },
        }
    }
}

/// Eigenvalue θ of Σ g_k σ_Z^k and its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaSector {
    pub theta: f64,
    pub weight: f64,
}

/// Exact sector decomposition of a discrete product ensemble.
pub fn enumerate_sectors(spec: &BathSpec) -> Result<Vec<ThetaSector>> {
    spec.validate()?;
    let BathSpec::Discrete { g, a, .. } = spec else {
        return Err(SmeError::InvalidParameter(
            "enumerate_sectors needs a discrete bath".into(),
        ));
    };
    let n = g.len();
    if n > MAX_ENUMERATED_SPINS {
        return Err(SmeError::BathTooLarge(n, MAX_ENUMERATED_SPINS));
    }
    let mut raw = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let mut theta = 0.0;
        let mut weight = 1.0;
        for k in 0..n {
            // bit set ⇒ spin k in |2⟩ (σ_Z = −1)
            if mask >> k & 1 == 1 {
                theta -= g[k];
                weight *= 1.0 - a[k];
            } else {
                theta += g[k];
                weight *= a[k];
            }
        }
        if weight > 0.0 {
            raw.push(ThetaSector { theta, weight });
        }
    }
    raw.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    let mut merged: Vec<ThetaSector> = Vec::new();
    for s in raw {
        match merged.last_mut() {
            Some(last) if (s.theta - last.theta).abs() < MERGE_TOL => last.weight += s.weight,
            _ => merged.push(s),
        }
    }
    Ok(merged)
}

/// Gauss–Hermite nodes and normalised weights for the weight e^{−x²}
/// (Golub–Welsch), symmetrised so that Σ w x = 0 holds to rounding.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let j = n - 1 - i;
        x[i] = 0.5 * (pairs[i].0 - pairs[j].0);
        w[i] = 0.5 * (pairs[i].1 + pairs[j].1);
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    (x, w)
}

/// Gauss–Hermite sector set for a Gaussian ensemble with its width frozen at `t_ref`.
pub fn quadrature_sectors(spec: &BathSpec, t_ref: f64, n_nodes: usize) -> Result<Vec<ThetaSector>> {
    spec.validate()?;
    if n_nodes < 3 {
        return Err(SmeError::InvalidParameter(format!(
            "need at least 3 quadrature nodes, got {n_nodes}"
        )));
    }
    let sigma = spec.gaussian_variance(t_ref)?.sqrt();
    let (x, w) = gauss_hermite(n_nodes);
    Ok(x.iter()
        .zip(&w)
        .map(|(&x, &w)| ThetaSector {
            theta: std::f64::consts::SQRT_2 * sigma * x,
            weight: w,
        })
        .collect())
}

/// Half-width of the uniform rule in units of the ensemble standard deviation.
pub const UNIFORM_HALF_WIDTH: f64 = 6.0;

/// Discretisation of a Gaussian ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Exact for polynomial moments; few nodes suffice for time-domain averages.
    #[default]
    GaussHermite,
    /// Evenly spaced θ over ±6σ. Needed for spectra, where each sector
    /// contributes a narrow line and Hermite nodes leave a comb.
    Uniform,
}

/// Evenly spaced sector set over ±6σ with normalised Gaussian weights.
pub fn uniform_sectors(spec: &BathSpec, t_ref: f64, n_nodes: usize) -> Result<Vec<ThetaSector>> {
    spec.validate()?;
    if n_nodes < 3 {
        return Err(SmeError::InvalidParameter(format!(
            "need at least 3 quadrature nodes, got {n_nodes}"
        )));
    }
    let sigma = spec.gaussian_variance(t_ref)?.sqrt();
    let h = 2.0 * UNIFORM_HALF_WIDTH / (n_nodes - 1) as f64;
    let xs: Vec<f64> = (0..n_nodes)
        .map(|k| -UNIFORM_HALF_WIDTH + h * k as f64)
        .collect();
    let raw: Vec<f64> = xs.iter().map(|x| (-0.5 * x * x).exp()).collect();
    let total: f64 = raw.iter().sum();
    Ok(xs
        .iter()
        .zip(&raw)
        .map(|(x, w)| ThetaSector {
            theta: sigma * x,
            weight: w / total,
        })
        .collect())
}

/// Sector set for any bath: exact for discrete, Gauss–Hermite for Gaussian.
pub fn sectors(spec: &BathSpec, t_ref: f64, n_nodes: usize) -> Result<Vec<ThetaSector>> {
    sectors_with(spec, t_ref, n_nodes, QuadratureRule::GaussHermite)
}

/// As [`sectors`] with an explicit rule for Gaussian ensembles.
pub fn sectors_with(
    spec: &BathSpec,
    t_ref: f64,
    n_nodes: usize,
    rule: QuadratureRule,
) -> Result<Vec<ThetaSector>> {
    match (spec.is_gaussian(), rule) {
        (false, _) => enumerate_sectors(spec),
        (true, QuadratureRule::GaussHermite) => quadrature_sectors(spec, t_ref, n_nodes),
        (true, QuadratureRule::Uniform) => uniform_sectors(spec, t_ref, n_nodes),
    }
}

/// Bath average of exp(−iθ Δs t) for a coherence between S-eigenvalues
/// differing by `ds`, with the Gaussian width evaluated at the same t.
pub fn pair_kernel(spec: &BathSpec, t: f64, ds: f64) -> Result<Complex64> {
    if t == 0.0 || ds == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if spec.is_gaussian() {
        let var = spec.gaussian_variance(t)?;
        return Ok(Complex64::new((-0.5 * var * ds * ds * t * t).exp(), 0.0));
    }
    Ok(enumerate_sectors(spec)?
        .iter()
        .map(|s| Complex64::from_polar(s.weight, -s.theta * ds * t))
        .sum())
}

/// Dephasing factor of the σ_z coherence: the average of e^{−2iθt}.
///
/// Gaussian classes give the real, nonincreasing exp(−V t^p); a discrete bath
/// gives its characteristic function, which can revive.
pub fn coherence_kernel(spec: &BathSpec, t: f64) -> Result<Complex64> {
    if t < 0.0 {
        return Err(SmeError::InvalidParameter(format!("kernel time {t} < 0")));
    }
    pair_kernel(spec, t, 2.0)
}

/// Draw one θ: spin configuration for a discrete bath, Gaussian at `t_ref` otherwise.
pub fn sample_theta<R: Rng + ?Sized>(spec: &BathSpec, t_ref: f64, rng: &mut R) -> Result<f64> {
    match spec {
        BathSpec::Discrete { g, a, .. } => Ok(g
            .iter()
            .zip(a)
            .map(|(g, a)| if rng.random::<f64>() < *a { *g } else { -*g })
            .sum()),
        _ => {
            let sigma = spec.gaussian_variance(t_ref)?.sqrt();
            let z: f64 = StandardNormal.sample(rng);
            Ok(sigma * z)
        }
    }
}
