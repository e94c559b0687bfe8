use serde::{Deserialize, Serialize};

use super::regression::CorrelationResult;
use crate::error::{Result, SmeError};

/// |R̃(τ_max)| above this fraction of max|R̃| means the lag grid is too short.
pub const TAIL_TOL: f64 = 1e-6;

/// Affine display map S_display = a·S_raw + b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rescale {
    pub a: f64,
    pub b: f64,
}

impl Default for Rescale {
    fn default() -> Self {
        Self { a: 1.0, b: 0.0 }
    }
}

impl Rescale {
    pub fn apply(&self, s: f64) -> f64 {
        self.a * s + self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakMetrics {
    pub omega_star: f64,
    pub height: f64,
    /// None when the half-height level is not crossed inside the window.
    pub fwhm: Option<f64>,
    pub multi_peak: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub s_raw: Vec<f64>,
    pub s_display: Vec<f64>,
    pub rescale: Rescale,
    /// Shot-noise floor 2ηκ.
    pub delta_weight: f64,
    /// Weight of the zero-frequency line 2π·dc_weight·δ(ω), not included in s_raw.
    pub dc_weight: f64,
}

impl SpectrumResult {
    pub fn new(
        omega: Vec<f64>,
        s_raw: Vec<f64>,
        delta_weight: f64,
        dc_weight: f64,
        rescale: Rescale,
    ) -> Self {
        let s_display = s_raw.iter().map(|&s| rescale.apply(s)).collect();
        Self {
            omega,
            s_raw,
            s_display,
            rescale,
            delta_weight,
            dc_weight,
        }
    }

    pub fn peak(&self, window: Option<(f64, f64)>) -> Result<PeakMetrics> {
        peak_metrics(&self.omega, &self.s_raw, self.delta_weight, window)
    }
}

/// 2 Re ∫₀^∞ e^{iωτ} R̃(τ) dτ by the trapezoid rule on the lag grid with the
/// h²/12 Euler–Maclaurin endpoint correction at τ = 0.
pub fn half_transform(corr: &CorrelationResult, omega: f64) -> f64 {
    let taus = &corr.taus;
    let r = &corr.r_tilde;
    let h = taus[1] - taus[0];
    let n = r.len();
    let mut re = 0.0;
    for k in 0..n {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        re += w * r[k] * (omega * taus[k]).cos();
    }
    // Re f'(0) with f = R̃ e^{iωτ}
    let corr0 = h * h / 12.0 * corr.slope0;
    2.0 * (h * re + corr0)
}

fn check_tail(corr: &CorrelationResult) -> Result<()> {
    let peak = corr.r_tilde.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail = corr.r_tilde.last().copied().unwrap_or(0.0).abs();
    if peak > 0.0 && tail > TAIL_TOL * peak {
        return Err(SmeError::UndecayedTail(tail / peak));
    }
    Ok(())
}

/// S(ω) = 2ηκ + 2 Re ∫₀^∞ e^{iωτ} R̃(τ) dτ from a sampled correlation.
pub fn spectrum(
    corr: &CorrelationResult,
    omegas: &[f64],
    rescale: Rescale,
) -> Result<SpectrumResult> {
    check_tail(corr)?;
    let s = omegas
        .iter()
        .map(|&w| corr.delta_weight + half_transform(corr, w))
        .collect();
    Ok(SpectrumResult::new(
        omegas.to_vec(),
        s,
        corr.delta_weight,
        corr.dc_weight,
        rescale,
    ))
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a >= 0.0 {
        return (x[1], y[1]);
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    let yv = y[1] + (xv - x[1]) * (d1 + a * (xv - x[0]));
    (xv, yv)
}

/// Global maximum in the window, refined parabolically, with its full width at
/// half height above `floor`.
pub fn peak_metrics(
    omega: &[f64],
    s: &[f64],
    floor: f64,
    window: Option<(f64, f64)>,
) -> Result<PeakMetrics> {
    if omega.len() != s.len() || omega.len() < 3 {
        return Err(SmeError::InvalidParameter(
            "peak search needs ≥ 3 matching samples".into(),
        ));
    }
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let idx: Vec<usize> = (0..omega.len())
        .filter(|&i| omega[i] >= lo && omega[i] <= hi)
        .collect();
    if idx.len() < 3 {
        return Err(SmeError::NoPeak(format!(
            "window [{lo}, {hi}] holds fewer than 3 samples"
        )));
    }
    let (first, last) = (idx[0], *idx.last().expect("non-empty"));
    let imax = idx
        .iter()
        .copied()
        .max_by(|&a, &b| s[a].total_cmp(&s[b]))
        .expect("non-empty");
    let smin = idx.iter().map(|&i| s[i]).fold(f64::INFINITY, f64::min);
    let scale = s[imax].abs().max(floor.abs()).max(1e-300);
    if s[imax] - smin <= 1e-14 * scale {
        return Err(SmeError::NoPeak("spectrum is flat".into()));
    }
    if imax == first || imax == last {
        return Err(SmeError::NoPeak(format!(
            "maximum at window edge ω = {}",
            omega[imax]
        )));
    }
    let (w_star, height) = parabola_vertex(
        [omega[imax - 1], omega[imax], omega[imax + 1]],
        [s[imax - 1], s[imax], s[imax + 1]],
    );

    let level = floor + 0.5 * (height - floor);
    let cross =
        |a: usize, b: usize| omega[a] + (level - s[a]) * (omega[b] - omega[a]) / (s[b] - s[a]);
    let mut left = None;
    let mut i = imax;
    while i > first {
        if s[i - 1] < level {
            left = Some(cross(i - 1, i));
            break;
        }
        i -= 1;
    }
    let mut right = None;
    let mut i = imax;
    while i < last {
        if s[i + 1] < level {
            right = Some(cross(i + 1, i));
            break;
        }
        i += 1;
    }
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    };

    let main = s[imax] - floor;
    let multi_peak = idx
        .windows(3)
        .map(|w| w[1])
        .filter(|&i| i != imax && s[i] > s[i - 1] && s[i] >= s[i + 1])
        .any(|i| s[i] - floor > 0.5 * main);
    Ok(PeakMetrics {
        omega_star: w_star,
        height,
        fwhm,
        multi_peak,
    })
}
