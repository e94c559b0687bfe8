use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, SweepConfig};
use super::emit::{emit, Table};
use super::manifest::{Command, Derived, RunManifest, MANIFEST_SCHEMA};
use crate::dispersive_frame::{
    build_frame, validity_report, DispersiveFrame, SystemModel, ValidityReport,
};
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, Operator};
use crate::operator_core::DensityMatrix;
use crate::sme_engine::{
    child_seed, full_unconditional, mixture_path, simulate_ensemble, simulate_trajectory,
    FullDynamics, ReducedDynamics, SimParams, TimeGrid,
};
use crate::spectroscopy::{
    build_measurement_operator, cross_correlation, joint_sectors, periodogram_spectrum, PairModel,
    PeakMetrics, Regression, SpectrumResult,
};
use crate::spin_bath::{sample_theta, ThetaSector};

/// Flags that are not part of the config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub force: bool,
    /// Overrides the config's sweep block.
    pub sweep: Option<SweepConfig>,
}

/// Everything a run needs, derived once from the config.
struct Setup {
    model: SystemModel,
    frame: DispersiveFrame,
    dynamics: ReducedDynamics,
    sectors: Vec<ThetaSector>,
    rho0: DensityMatrix,
    derived: Derived,
}

fn conventions(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("current".into(), "dQ = 2ηκ⟨ĉ + ĉ†⟩dt + √(2ηκ) dW, I = ΔQ/Δt per bin".into()),
        (
            "spectrum".into(),
            "S(ω) = 2ηκ + 2 Re ∫₀^∞ e^{iωτ} R̃(τ) dτ; the line 2π·dc_weight·δ(ω) is reported separately".into(),
        ),
        ("tuning_field".into(), "H_field = −(Ω_f/2)σ_z".into()),
        ("vectorization".into(), "column stacking".into()),
        ("scheme".into(), format!("{:?}", cfg.sim.scheme)),
        ("alpha_corrections".into(), cfg.sim.include_alpha_corrections.to_string()),
    ])
}

fn derive(
    cfg: &ExperimentConfig,
    model: &SystemModel,
    frame: &DispersiveFrame,
    report: ValidityReport,
    omega_f: Option<f64>,
    alpha_source: &str,
    force: bool,
) -> Derived {
    let a = model.alpha();
    Derived {
        epsilon: frame.epsilon,
        bad_cavity_margin: frame.bad_cavity_margin,
        validity: report,
        forced: force,
        field_mode: cfg.system.field,
        omega_f,
        alpha: [a.re, a.im],
        alpha_source: alpha_source.into(),
        conventions: conventions(cfg),
        peak: None,
    }
}

fn checked(
    model: &SystemModel,
    frame: &DispersiveFrame,
    cfg: &ExperimentConfig,
    force: bool,
) -> Result<ValidityReport> {
    let report = validity_report(frame, model, &cfg.system.frame);
    if !force {
        report.ensure()?;
    }
    Ok(report)
}

fn setup(cfg: &ExperimentConfig, force: bool) -> Result<Setup> {
    cfg.sim.validate()?;
    let (model, omega_f) = cfg.model()?;
    let frame = build_frame(&model, &cfg.system.frame)?;
    let report = checked(&model, &frame, cfg, force)?;
    let source = if cfg.system.alpha.is_some() {
        "config"
    } else {
        "ξ/(iκ)"
    };
    let derived = derive(cfg, &model, &frame, report, omega_f, source, force);
    let dynamics = ReducedDynamics::new(&model, &frame, cfg.sim.include_alpha_corrections);
    let sectors = cfg.bath.quadrature.sectors(&cfg.bath.spec)?;
    let rho0 = cfg.system.initial_state.product(1);
    Ok(Setup {
        model,
        frame,
        dynamics,
        sectors,
        rho0,
        derived,
    })
}

fn manifest(
    command: Command,
    cfg: &ExperimentConfig,
    derived: Derived,
    extras: BTreeMap<String, f64>,
) -> RunManifest {
    RunManifest {
        schema_version: MANIFEST_SCHEMA,
        artifact: env!("CARGO_PKG_NAME").into(),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        command,
        seed: cfg.sim.seed,
        config: cfg.clone(),
        derived,
        extras,
        outputs: Vec::new(),
        wall_clock_seconds: 0.0,
    }
}

fn spectrum_table(s: &SpectrumResult) -> Table {
    let mut t = Table::new("spectrum.csv", &["omega", "S_raw", "S_display"]);
    for k in 0..s.omega.len() {
        t.push(&[s.omega[k], s.s_raw[k], s.s_display[k]]);
    }
    t
}

/// Peak metrics, or None when the window holds no interior maximum.
fn peak(s: &SpectrumResult, cfg: &ExperimentConfig) -> Result<Option<PeakMetrics>> {
    match s.peak(cfg.analysis.peak_window.map(|w| (w[0], w[1]))) {
        Ok(p) => Ok(Some(p)),
        Err(SmeError::NoPeak(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn entry_names(cfg: &ExperimentConfig, dim: usize, prefix: &str) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for &[i, j] in &cfg.analysis.entries {
        if i >= dim || j >= dim {
            return Err(SmeError::Config(format!(
                "state entry ({i}, {j}) outside a {dim}x{dim} matrix"
            )));
        }
        names.push(format!("{prefix}_{i}{j}_re"));
        names.push(format!("{prefix}_{i}{j}_im"));
    }
    Ok(names)
}

fn entries(cfg: &ExperimentConfig, rho: &Operator) -> Vec<f64> {
    cfg.analysis
        .entries
        .iter()
        .flat_map(|&[i, j]| [rho[(i, j)].re, rho[(i, j)].im])
        .collect()
}

type Outcome = (Vec<Table>, Derived, BTreeMap<String, f64>);

/// Regression spectrum of the configured single system on its ω grid, with
/// peak metrics when the peak window holds an interior maximum.
pub fn compute_spectrum(
    cfg: &ExperimentConfig,
    force: bool,
) -> Result<(SpectrumResult, Option<PeakMetrics>)> {
    let s = setup(cfg, force)?;
    let reg = Regression::from_dynamics(&s.dynamics, &s.sectors, &s.rho0)?;
    let (cop, _) = build_measurement_operator(&s.model, &s.frame);
    let spec = reg.spectrum(&cop, &cfg.analysis.omega.values()?, cfg.analysis.rescale)?;
    let p = peak(&spec, cfg)?;
    Ok((spec, p))
}

fn spectrum_run(cfg: &ExperimentConfig, force: bool) -> Result<Outcome> {
    let mut s = setup(cfg, force)?;
    let omegas = cfg.analysis.omega.values()?;
    let reg = Regression::from_dynamics(&s.dynamics, &s.sectors, &s.rho0)?;
    let (cop, x) = build_measurement_operator(&s.model, &s.frame);
    let spec = reg.spectrum(&cop, &omegas, cfg.analysis.rescale)?;
    let corr = reg.correlation(&cop, &x, cfg.analysis.tau)?;
    s.derived.peak = peak(&spec, cfg)?;

    let mut ct = Table::new("correlation.csv", &["tau", "R_tilde"]);
    for (t, r) in corr.taus.iter().zip(&corr.r_tilde) {
        ct.push(&[*t, *r]);
    }
    let tail =
        corr.r_tilde.last().map_or(0.0, |v| v.abs()) / corr.sup_norm().max(f64::MIN_POSITIVE);
    let extras = BTreeMap::from([
        ("delta_weight".into(), spec.delta_weight),
        ("dc_weight".into(), spec.dc_weight),
        ("slope0".into(), corr.slope0),
        ("tail_ratio".into(), tail),
        ("sectors".into(), s.sectors.len() as f64),
    ]);
    Ok((vec![spectrum_table(&spec), ct], s.derived, extras))
}

fn trajectory_run(cfg: &ExperimentConfig, force: bool) -> Result<Outcome> {
    let s = setup(cfg, force)?;
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(cfg.sim.seed, u64::MAX, 0));
    let theta = sample_theta(&cfg.bath.spec, cfg.bath.quadrature.t_ref, &mut rng)?;
    let params = SimParams {
        store_stride: cfg.sim.current_bin,
        ..cfg.sim.clone()
    };
    let rec = simulate_trajectory(
        &s.dynamics,
        theta,
        &s.rho0,
        &params,
        child_seed(cfg.sim.seed, 0, 0),
    )?;

    let mut header = vec!["t".to_string(), "I".to_string()];
    header.extend(entry_names(cfg, s.rho0.dim(), "rho")?);
    let mut t = Table::with_header("trajectory.csv", header);
    for k in 0..rec.current.len() {
        let mut row = vec![rec.current_times[k], rec.current[k]];
        row.extend(entries(cfg, &rec.states[k + 1]));
        t.push(&row);
    }
    let extras = BTreeMap::from([
        ("theta".into(), theta),
        ("noise_seed".into(), rec.seed as f64),
    ]);
    Ok((vec![t], s.derived, extras))
}

fn ensemble_run(cfg: &ExperimentConfig, force: bool) -> Result<Outcome> {
    let s = setup(cfg, force)?;
    let ens = simulate_ensemble(&s.dynamics, &s.sectors, &s.rho0, &cfg.sim, true)?;
    let grid = TimeGrid::new(
        cfg.sim.dt * cfg.sim.store_stride as f64,
        ens.times.len() - 1,
    )?;
    let path = mixture_path(&s.dynamics, &s.sectors, &s.rho0, grid)?;

    let mut header = vec!["t".to_string()];
    header.extend(entry_names(cfg, s.rho0.dim(), "mean")?);
    header.extend(entry_names(cfg, s.rho0.dim(), "uncond")?);
    header.push("sup_err".into());
    let mut t = Table::with_header("ensemble.csv", header);
    let mut worst: f64 = 0.0;
    for ((time, mean), uncond) in ens.times.iter().zip(&ens.mean).zip(&path) {
        let err = algebra::sup_norm(&(mean - uncond));
        worst = worst.max(err);
        let mut row = vec![*time];
        row.extend(entries(cfg, mean));
        row.extend(entries(cfg, uncond));
        row.push(err);
        t.push(&row);
    }

    let omegas = cfg.analysis.omega.values()?;
    let pg = periodogram_spectrum(
        &ens.records,
        &omegas,
        cfg.analysis.welch,
        2.0 * s.dynamics.eta_kappa(),
        cfg.analysis.rescale,
    )?;
    let reg = Regression::from_dynamics(&s.dynamics, &s.sectors, &s.rho0)?;
    let exact = reg.spectrum(s.dynamics.measurement(), &omegas, cfg.analysis.rescale)?;
    let mut pt = Table::new(
        "periodogram.csv",
        &["omega", "S_raw", "S_display", "stderr", "S_regression"],
    );
    for (k, omega) in omegas.iter().enumerate() {
        pt.push(&[
            *omega,
            pg.spectrum.s_raw[k],
            pg.spectrum.s_display[k],
            pg.stderr[k],
            exact.s_raw[k],
        ]);
    }
    let extras = BTreeMap::from([
        ("sup_err".into(), worst),
        ("trajectories".into(), ens.records.len() as f64),
        ("segments".into(), pg.segments as f64),
    ]);
    Ok((vec![t, pt], s.derived, extras))
}

fn correlated_run(cfg: &ExperimentConfig, force: bool) -> Result<Outcome> {
    let s = setup(cfg, force)?;
    let pair = PairModel::new(s.dynamics.clone(), s.dynamics.clone())?;
    let joint = joint_sectors(&s.sectors, &s.sectors, cfg.bath.r)?;
    let reg = pair.regression(&joint, &s.rho0, &s.rho0)?;
    let (m1, m2) = pair.measurements();
    let cc = cross_correlation(&reg, &m1, &m2, cfg.analysis.tau)?;

    let mut ct = Table::new("correlation.csv", &["tau", "R1", "R2", "Rc", "Rtotal"]);
    for k in 0..cc.total.taus.len() {
        ct.push(&[
            cc.total.taus[k],
            cc.r1.r_tilde[k],
            cc.r2.r_tilde[k],
            cc.rc.r_tilde[k],
            cc.total.r_tilde[k],
        ]);
    }
    // summed current: two independent shot noises
    let omegas = cfg.analysis.omega.values()?;
    let sum = &m1 + &m2;
    let floor = 2.0 * reg.rate;
    let lag = reg.resolvent(&sum, &(&sum + sum.adjoint()), &omegas)?;
    let spec = SpectrumResult::new(
        omegas,
        lag.into_iter().map(|v| floor + v).collect(),
        floor,
        cc.total.dc_weight,
        cfg.analysis.rescale,
    );
    let mut derived = s.derived;
    derived.peak = peak(&spec, cfg)?;
    let extras = BTreeMap::from([
        ("r".into(), cfg.bath.r),
        ("dc_1".into(), cc.r1.dc_weight),
        ("dc_2".into(), cc.r2.dc_weight),
        ("dc_c".into(), cc.rc.dc_weight),
        ("dc_total".into(), cc.total.dc_weight),
        ("Rc_zero".into(), cc.rc.at_zero()),
        ("Rc_sup".into(), cc.rc.sup_norm()),
        ("additivity_defect".into(), cc.additivity_defect()),
    ]);
    Ok((vec![ct, spectrum_table(&spec)], derived, extras))
}

/// Unconditional full (system ⊗ truncated cavity) vs reduced evolution. The
/// reduced model uses the full model's drive amplitude so both describe the
/// same cavity.
fn validate_run(cfg: &ExperimentConfig, force: bool) -> Result<Outcome> {
    cfg.sim.validate()?;
    let (model, omega_f) = cfg.model()?;
    let frame = build_frame(&model, &cfg.system.frame)?;
    let full = FullDynamics::new(&model, &frame, cfg.sim.fock_cutoff)?;
    let mut reduced_model = model;
    reduced_model.drive.alpha = Some(full.alpha());
    let frame = build_frame(&reduced_model, &cfg.system.frame)?;
    let report = checked(&reduced_model, &frame, cfg, force)?;
    let derived = derive(
        cfg,
        &reduced_model,
        &frame,
        report,
        omega_f,
        "ξ/(i(κ + iΔ))",
        force,
    );
    let dynamics = ReducedDynamics::new(&reduced_model, &frame, cfg.sim.include_alpha_corrections);
    let secs = cfg.bath.quadrature.sectors(&cfg.bath.spec)?;
    let rho0 = cfg.system.initial_state.product(1);

    let stride = cfg.sim.store_stride;
    let grid = TimeGrid::new(cfg.sim.dt * stride as f64, cfg.sim.steps() / stride)?;
    let fp = full_unconditional(&full, &secs, &rho0, grid)?;
    let rp = mixture_path(&dynamics, &secs, &rho0, grid)?;
    let mut t = Table::new("validation.csv", &["t", "trace_distance"]);
    let mut worst: f64 = 0.0;
    for ((time, full_state), reduced) in fp.times.iter().zip(&fp.system).zip(&rp) {
        let d = algebra::trace_distance(full_state, reduced)?;
        worst = worst.max(d);
        t.push(&[*time, d]);
    }
    let extras = BTreeMap::from([
        ("max_trace_distance".into(), worst),
        ("max_top_population".into(), fp.max_top_population),
        (
            "truncation_warning".into(),
            if fp.truncation_warning { 1.0 } else { 0.0 },
        ),
        ("fock_cutoff".into(), cfg.sim.fock_cutoff as f64),
    ]);
    Ok((vec![t], derived, extras))
}

fn single(command: Command, cfg: &ExperimentConfig, force: bool) -> Result<Outcome> {
    match command {
        Command::Spectrum => spectrum_run(cfg, force),
        Command::Trajectory => trajectory_run(cfg, force),
        Command::Ensemble => ensemble_run(cfg, force),
        Command::Correlated => correlated_run(cfg, force),
        Command::Validate => validate_run(cfg, force),
        Command::Sweep => unreachable!("sweeps are dispatched separately"),
    }
}

fn finish(
    dir: &Path,
    command: Command,
    cfg: &ExperimentConfig,
    out: Outcome,
    start: Instant,
) -> Result<RunManifest> {
    let (tables, derived, extras) = out;
    let mut m = manifest(command, cfg, derived, extras);
    m.wall_clock_seconds = start.elapsed().as_secs_f64();
    emit(dir, &tables, &mut m)?;
    Ok(m)
}

/// Spectrum at each sweep value in parallel, one subdirectory per point, plus
/// a summary of the peak metrics. Each point's seed is a child of the master
/// seed keyed by the value, so reordering the values changes nothing.
fn sweep_run(
    cfg: &ExperimentConfig,
    dir: &Path,
    opts: &RunOptions,
    start: Instant,
) -> Result<RunManifest> {
    let sweep = opts
        .sweep
        .clone()
        .or_else(|| cfg.analysis.sweep.clone())
        .ok_or_else(|| {
            SmeError::Config("sweep needs --axis and --values or an [analysis.sweep] block".into())
        })?;
    if sweep.values.is_empty() {
        return Err(SmeError::Config("sweep has no values".into()));
    }
    let mut cfg = cfg.clone();
    cfg.analysis.sweep = Some(sweep.clone());
    let width = sweep.values.len().to_string().len().max(2);
    let points: Vec<(usize, f64)> = sweep.values.iter().copied().enumerate().collect();
    let peaks = points
        .par_iter()
        .map(|&(i, v)| {
            let mut point = cfg.with_axis(sweep.axis, v)?;
            point.analysis.sweep = None;
            point.sim.seed = child_seed(cfg.sim.seed, v.to_bits(), 0);
            let sub = dir.join(format!("point_{i:0width$}"));
            point.output.dir = sub.to_string_lossy().into_owned();
            let m = finish(
                &sub,
                Command::Spectrum,
                &point,
                spectrum_run(&point, opts.force)?,
                Instant::now(),
            )?;
            Ok(m.derived.peak)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = Table::new(
        "summary.csv",
        &["value", "omega_star", "height", "fwhm", "multi_peak"],
    );
    let num = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for (v, p) in sweep.values.iter().zip(&peaks) {
        t.push_text(vec![
            v.to_string(),
            num(p.map(|p| p.omega_star)),
            num(p.map(|p| p.height)),
            num(p.and_then(|p| p.fwhm)),
            p.map_or(String::new(), |p| p.multi_peak.to_string()),
        ]);
    }
    let base = setup(&cfg, opts.force)?;
    let extras = BTreeMap::from([("points".into(), sweep.values.len() as f64)]);
    finish(
        dir,
        Command::Sweep,
        &cfg,
        (vec![t], base.derived, extras),
        start,
    )
}

/// Run one subcommand and write its outputs; returns the manifest written.
pub fn run(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    let start = Instant::now();
    let mut cfg = cfg.clone();
    if let Some(out) = &opts.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    let dir = PathBuf::from(&cfg.output.dir);
    if command == Command::Sweep {
        return sweep_run(&cfg, &dir, opts, start);
    }
    let out = single(command, &cfg, opts.force)?;
    finish(&dir, command, &cfg, out, start)
}
