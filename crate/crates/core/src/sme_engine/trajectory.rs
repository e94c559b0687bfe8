use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::reduced::ReducedDynamics;
use super::stepper::{Scheme, Stepper};
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, Operator};
use crate::operator_core::state::DensityMatrix;
use crate::spin_bath::ThetaSector;

/// Integration and sampling controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    pub dt: f64,
    /// Horizon T.
    pub t_end: f64,
    /// Trajectory count M.
    pub trajectories: usize,
    pub fock_cutoff: usize,
    /// Keep every `store_stride`-th state.
    pub store_stride: usize,
    /// Steps per current sample.
    pub current_bin: usize,
    pub seed: u64,
    pub clamp_positivity: bool,
    pub include_alpha_corrections: bool,
    pub scheme: Scheme,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 5.0,
            trajectories: 100,
            fock_cutoff: 10,
            store_stride: 10,
            current_bin: 1,
            seed: 0,
            clamp_positivity: false,
            include_alpha_corrections: false,
            scheme: Scheme::ExponentialEuler,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SmeError::InvalidParameter(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return bad(format!("horizon {} shorter than dt", self.t_end));
        }
        if self.trajectories == 0 {
            return bad("need at least one trajectory".into());
        }
        if self.store_stride == 0 || self.current_bin == 0 {
            return bad("store_stride and current_bin must be ≥ 1".into());
        }
        if self.fock_cutoff < 2 {
            return bad(format!("fock_cutoff {} < 2", self.fock_cutoff));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// One conditioned run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub theta: f64,
    pub dt: f64,
    /// Times of the stored states.
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    /// End times of the current bins.
    pub current_times: Vec<f64>,
    /// I_k = ΔQ_k / Δt over each bin.
    pub current: Vec<f64>,
    /// Wiener increments, kept only when requested.
    pub increments: Vec<f64>,
}

/// Child seed of (master, sector, index) from a SHA-256 digest; stable across
/// platforms and releases.
pub fn child_seed(master: u64, sector: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(sector.to_le_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Wiener increments N(0, dt) from a seeded stream.
pub struct WienerSource {
    rng: ChaCha8Rng,
    sqrt_dt: f64,
}

impl WienerSource {
    pub fn new(seed: u64, dt: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            sqrt_dt: dt.sqrt(),
        }
    }

    pub fn next_increment(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        z * self.sqrt_dt
    }
}

/// Drive a stepper from `rho0` for `steps` steps with the given noise seed.
#[allow(clippy::too_many_arguments)]
pub fn run_stepper(
    stepper: &Stepper,
    rho0: &Operator,
    steps: usize,
    store_stride: usize,
    current_bin: usize,
    seed: u64,
    theta: f64,
    keep_increments: bool,
) -> Result<TrajectoryRecord> {
    let dt = stepper.dt();
    let mut noise = WienerSource::new(seed, dt);
    let mut rho = rho0.clone();
    let mut rec = TrajectoryRecord {
        seed,
        theta,
        dt,
        times: vec![0.0],
        states: vec![rho.clone()],
        current_times: Vec::with_capacity(steps / current_bin),
        current: Vec::with_capacity(steps / current_bin),
        increments: Vec::new(),
    };
    let mut charge = 0.0;
    for k in 0..steps {
        let t = k as f64 * dt;
        let dw = noise.next_increment();
        if keep_increments {
            rec.increments.push(dw);
        }
        charge += stepper.charge(&rho, dw);
        rho = stepper.step(&rho, dw, t)?;
        let done = k + 1;
        if done % current_bin == 0 {
            rec.current_times.push(done as f64 * dt);
            rec.current.push(charge / (current_bin as f64 * dt));
            charge = 0.0;
        }
        if done % store_stride == 0 {
            rec.times.push(done as f64 * dt);
            rec.states.push(rho.clone());
        }
    }
    Ok(rec)
}

/// Conditioned evolution in bath sector θ.
pub fn simulate_trajectory(
    dynamics: &ReducedDynamics,
    theta: f64,
    rho0: &DensityMatrix,
    params: &SimParams,
    seed: u64,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    let stepper = Stepper::for_sector(
        dynamics,
        theta,
        params.dt,
        params.scheme,
        params.clamp_positivity,
    )?;
    run_stepper(
        &stepper,
        rho0.as_op(),
        params.steps(),
        params.store_stride,
        params.current_bin,
        seed,
        theta,
        false,
    )
}

/// Split M trajectories over sectors in proportion to weight (largest remainder).
pub fn allocate(total: usize, sectors: &[ThetaSector]) -> Vec<usize> {
    let raw: Vec<f64> = sectors.iter().map(|s| s.weight * total as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sectors.len()).collect();
    order.sort_by(|&i, &j| {
        (raw[j] - raw[j].floor())
            .total_cmp(&(raw[i] - raw[i].floor()))
            .then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Ensemble over bath sectors.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub times: Vec<f64>,
    /// Σ_sectors weight × (sample mean over that sector's trajectories).
    pub mean: Vec<Operator>,
    pub counts: Vec<usize>,
    pub records: Vec<TrajectoryRecord>,
}

/// Run M trajectories split across sectors in parallel; seeds are children of
/// `params.seed` and the reduction order is fixed, so the result does not
/// depend on the thread count.
pub fn simulate_ensemble(
    dynamics: &ReducedDynamics,
    sectors: &[ThetaSector],
    rho0: &DensityMatrix,
    params: &SimParams,
    keep_records: bool,
) -> Result<Ensemble> {
    params.validate()?;
    let counts = allocate(params.trajectories, sectors);
    let steppers: Vec<Option<Stepper>> = sectors
        .iter()
        .zip(&counts)
        .map(|(s, &n)| {
            if n == 0 {
                Ok(None)
            } else {
                Stepper::for_sector(
                    dynamics,
                    s.theta,
                    params.dt,
                    params.scheme,
                    params.clamp_positivity,
                )
                .map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .flat_map(|(s, &n)| (0..n).map(move |i| (s, i)))
        .collect();
    let records: Vec<TrajectoryRecord> = jobs
        .par_iter()
        .map(|&(s, i)| {
            let stepper = steppers[s].as_ref().expect("sector has trajectories");
            run_stepper(
                stepper,
                rho0.as_op(),
                params.steps(),
                params.store_stride,
                params.current_bin,
                child_seed(params.seed, s as u64, i as u64),
                sectors[s].theta,
                false,
            )
        })
        .collect::<Result<_>>()?;

    let times = records.first().map(|r| r.times.clone()).unwrap_or_default();
    let dim = rho0.dim();
    let mut mean = vec![algebra::zeros(dim); times.len()];
    let mut cursor = 0;
    for (s, &n) in counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let w = sectors[s].weight / n as f64;
        for rec in &records[cursor..cursor + n] {
            for (acc, st) in mean.iter_mut().zip(&rec.states) {
                *acc += st * algebra::c(w, 0.0);
            }
        }
        cursor += n;
    }
    // sectors with no trajectories carry no weight in the estimate; renormalise
    let covered: f64 = sectors
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(s, _)| s.weight)
        .sum();
    if covered > 0.0 && covered != 1.0 {
        mean.iter_mut()
            .for_each(|m| *m *= algebra::c(1.0 / covered, 0.0));
    }
    Ok(Ensemble {
        times,
        mean,
        counts,
        records: if keep_records { records } else { Vec::new() },
    })
}
