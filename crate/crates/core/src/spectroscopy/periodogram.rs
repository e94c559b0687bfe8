use serde::{Deserialize, Serialize};

use super::spectrum::{Rescale, SpectrumResult};
use crate::error::{Result, SmeError};
use crate::sme_engine::TrajectoryRecord;

/// Welch estimator settings: Hann-windowed segments with 50% overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WelchSettings {
    /// Samples with t < t_burn are discarded.
    pub t_burn: f64,
    /// Segment length in current samples.
    pub segment: usize,
}

impl Default for WelchSettings {
    fn default() -> Self {
        Self {
            t_burn: 0.5,
            segment: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    pub spectrum: SpectrumResult,
    /// Standard error of the segment average at each ω.
    pub stderr: Vec<f64>,
    pub segments: usize,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect()
}

/// Δt/Σw² · |Σ w_n δI_n e^{−iωnΔt}|² for one segment of centred current.
fn segment_power(seg: &[f64], window: &[f64], norm: f64, dt: f64, omegas: &[f64]) -> Vec<f64> {
    let xs: Vec<f64> = seg.iter().zip(window).map(|(v, w)| v * w).collect();
    omegas
        .iter()
        .map(|&om| {
            // rotate a unit phasor instead of calling sin/cos per sample
            let (s1, c1) = (-om * dt).sin_cos();
            let (mut re, mut im) = (0.0, 0.0);
            let (mut pr, mut pi) = (1.0, 0.0);
            for (n, x) in xs.iter().enumerate() {
                re += x * pr;
                im += x * pi;
                if n % 256 == 255 {
                    let (s, c) = (-om * dt * (n + 1) as f64).sin_cos();
                    pr = c;
                    pi = s;
                } else {
                    let t = pr * c1 - pi * s1;
                    pi = pr * s1 + pi * c1;
                    pr = t;
                }
            }
            norm * (re * re + im * im)
        })
        .collect()
}

/// Current fluctuations about the time-resolved ensemble mean, with the gain
/// M/(M − 1) that undoes the noise removed along with the sample mean. A
/// per-segment mean would also remove broadband noise inside the window's
/// main lobe around zero frequency. Records of unequal length, or a single
/// record, fall back to each record's own mean.
fn centre(records: &[TrajectoryRecord]) -> (Vec<Vec<f64>>, f64) {
    let m = records.len();
    let len = records[0].current.len();
    if m < 2 || records.iter().any(|r| r.current.len() != len) {
        let own = records
            .iter()
            .map(|r| {
                let mean = r.current.iter().sum::<f64>() / r.current.len().max(1) as f64;
                r.current.iter().map(|v| v - mean).collect()
            })
            .collect();
        return (own, 1.0);
    }
    let mut mean = vec![0.0; len];
    for r in records {
        for (a, v) in mean.iter_mut().zip(&r.current) {
            *a += v / m as f64;
        }
    }
    let centred = records
        .iter()
        .map(|r| r.current.iter().zip(&mean).map(|(v, a)| v - a).collect())
        .collect();
    (centred, m as f64 / (m - 1) as f64)
}

/// Welch-averaged periodogram of the binned currents of several records.
pub fn periodogram_spectrum(
    records: &[TrajectoryRecord],
    omegas: &[f64],
    settings: WelchSettings,
    delta_weight: f64,
    rescale: Rescale,
) -> Result<Periodogram> {
    use rayon::prelude::*;
    let seg = settings.segment;
    if seg < 4 {
        return Err(SmeError::InvalidParameter(format!(
            "Welch segment of {seg} samples"
        )));
    }
    let first = records
        .first()
        .ok_or_else(|| SmeError::RecordTooShort("no records".into()))?;
    let dt = match first.current_times.as_slice() {
        [a, b, ..] => b - a,
        _ => {
            return Err(SmeError::RecordTooShort(
                "fewer than two current samples".into(),
            ))
        }
    };
    let (centred, gain) = centre(records);
    let window = hann(seg);
    let norm = gain * dt / window.iter().map(|w| w * w).sum::<f64>();
    let hop = seg / 2;

    let mut jobs = Vec::new();
    for (r, rec) in records.iter().enumerate() {
        let start = rec
            .current_times
            .iter()
            .position(|&t| t - dt >= settings.t_burn - 1e-12)
            .unwrap_or(rec.current.len());
        let len = rec.current.len() - start;
        if len < seg + hop {
            return Err(SmeError::RecordTooShort(format!(
                "record {r} has {len} samples after burn-in, need at least 2 segments of {seg} with 50% overlap"
            )));
        }
        let mut off = start;
        while off + seg <= rec.current.len() {
            jobs.push((r, off));
            off += hop;
        }
    }
    let powers: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(r, off)| segment_power(&centred[r][off..off + seg], &window, norm, dt, omegas))
        .collect();

    let n = powers.len() as f64;
    let mut mean = vec![0.0; omegas.len()];
    for p in &powers {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; omegas.len()];
    for p in &powers {
        for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let stderr = var
        .iter()
        .map(|s| (s / (n - 1.0).max(1.0) / n).sqrt())
        .collect();
    Ok(Periodogram {
        spectrum: SpectrumResult::new(omegas.to_vec(), mean, delta_weight, 0.0, rescale),
        stderr,
        segments: powers.len(),
    })
}
