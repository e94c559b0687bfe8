//! C interface to the spinsme simulator.
//!
//! Every call returns a [`SpinsmeStatus`]; on failure the message is
//! available from [`spinsme_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use spinsme::cli_runner::{self, Command, ExperimentConfig, RunOptions};
use spinsme::spectroscopy::{PeakMetrics, SpectrumResult};
use spinsme::SmeError;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinsmeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Config could not be parsed or is inconsistent.
    Config = 3,
    /// Physics validation failed or an input was out of range.
    Invalid = 4,
    /// The computation aborted for numerical reasons.
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Subcommands of the runner.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinsmeCommand {
    Spectrum = 0,
    Trajectory = 1,
    Ensemble = 2,
    Sweep = 3,
    Correlated = 4,
    Validate = 5,
}

impl From<SpinsmeCommand> for Command {
    fn from(c: SpinsmeCommand) -> Self {
        match c {
            SpinsmeCommand::Spectrum => Command::Spectrum,
            SpinsmeCommand::Trajectory => Command::Trajectory,
            SpinsmeCommand::Ensemble => Command::Ensemble,
            SpinsmeCommand::Sweep => Command::Sweep,
            SpinsmeCommand::Correlated => Command::Correlated,
            SpinsmeCommand::Validate => Command::Validate,
        }
    }
}

/// Peak of a spectrum; `fwhm` is NaN when the half-height level is not crossed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinsmePeak {
    pub omega_star: f64,
    pub height: f64,
    pub fwhm: f64,
    pub multi_peak: bool,
}

impl From<PeakMetrics> for SpinsmePeak {
    fn from(p: PeakMetrics) -> Self {
        Self {
            omega_star: p.omega_star,
            height: p.height,
            fwhm: p.fwhm.unwrap_or(f64::NAN),
            multi_peak: p.multi_peak,
        }
    }
}

/// A parsed experiment config.
pub struct SpinsmeExperiment {
    config: ExperimentConfig,
    force: bool,
}

/// A computed spectrum.
pub struct SpinsmeSpectrum {
    result: SpectrumResult,
    peak: Option<PeakMetrics>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &SmeError) -> SpinsmeStatus {
    match cli_runner::exit_code(e) {
        cli_runner::EXIT_CONFIG => SpinsmeStatus::Config,
        cli_runner::EXIT_NUMERICAL => SpinsmeStatus::Numerical,
        cli_runner::EXIT_IO => SpinsmeStatus::Io,
        _ => SpinsmeStatus::Invalid,
    }
}

/// Run `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (SpinsmeStatus, String)>) -> SpinsmeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SpinsmeStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside spinsme".into());
            SpinsmeStatus::Panic
        }
    }
}

fn sme(e: SmeError) -> (SpinsmeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SpinsmeStatus, String) {
    (SpinsmeStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SpinsmeStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (SpinsmeStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next spinsme call on the same thread.
#[no_mangle]
pub extern "C" fn spinsme_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spinsme_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a TOML config. On success `*out` owns a new handle.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn spinsme_experiment_from_toml(
    toml: *const c_char,
    out: *mut *mut SpinsmeExperiment,
) -> SpinsmeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = ExperimentConfig::from_toml(text(toml, "toml")?).map_err(sme)?;
        *out = Box::into_raw(Box::new(SpinsmeExperiment {
            config: cfg,
            force: false,
        }));
        Ok(())
    })
}

/// # Safety
/// `exp` must come from `spinsme_experiment_from_toml` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spinsme_experiment_free(exp: *mut SpinsmeExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinsme_experiment_set_seed(
    exp: *mut SpinsmeExperiment,
    seed: u64,
) -> SpinsmeStatus {
    guard(|| {
        let e = exp.as_mut().ok_or_else(|| null("experiment"))?;
        e.config.sim.seed = seed;
        Ok(())
    })
}

/// Skip the validity check before runs.
///
/// # Safety
/// `exp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinsme_experiment_set_force(
    exp: *mut SpinsmeExperiment,
    force: bool,
) -> SpinsmeStatus {
    guard(|| {
        let e = exp.as_mut().ok_or_else(|| null("experiment"))?;
        e.force = force;
        Ok(())
    })
}

/// Run a subcommand, writing its files into `out_dir` (null means the config's directory).
///
/// # Safety
/// `exp` must be a live handle; `out_dir` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn spinsme_run(
    exp: *const SpinsmeExperiment,
    command: SpinsmeCommand,
    out_dir: *const c_char,
) -> SpinsmeStatus {
    guard(|| {
        let e = exp.as_ref().ok_or_else(|| null("experiment"))?;
        let out = if out_dir.is_null() {
            None
        } else {
            Some(PathBuf::from(text(out_dir, "out_dir")?))
        };
        let opts = RunOptions {
            out,
            force: e.force,
            sweep: None,
        };
        cli_runner::run(command.into(), &e.config, &opts).map_err(sme)?;
        Ok(())
    })
}

/// Regression spectrum of the experiment. On success `*out` owns a new handle.
///
/// # Safety
/// `exp` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spinsme_spectrum_compute(
    exp: *const SpinsmeExperiment,
    out: *mut *mut SpinsmeSpectrum,
) -> SpinsmeStatus {
    guard(|| {
        let e = exp.as_ref().ok_or_else(|| null("experiment"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let (result, peak) = cli_runner::compute_spectrum(&e.config, e.force).map_err(sme)?;
        *out = Box::into_raw(Box::new(SpinsmeSpectrum { result, peak }));
        Ok(())
    })
}

/// Number of ω points; 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn spinsme_spectrum_len(spec: *const SpinsmeSpectrum) -> usize {
    spec.as_ref().map_or(0, |s| s.result.omega.len())
}

/// Copy ω, S_raw and S_display into caller buffers of `len` doubles each.
/// Any of the three may be null to skip it.
///
/// # Safety
/// Non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spinsme_spectrum_copy(
    spec: *const SpinsmeSpectrum,
    omega: *mut f64,
    s_raw: *mut f64,
    s_display: *mut f64,
    len: usize,
) -> SpinsmeStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spectrum"))?;
        let n = s.result.omega.len();
        if len < n {
            return Err((
                SpinsmeStatus::BufferTooSmall,
                format!("need {n} values, buffer holds {len}"),
            ));
        }
        for (src, dst) in [
            (&s.result.omega, omega),
            (&s.result.s_raw, s_raw),
            (&s.result.s_display, s_display),
        ] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, n);
            }
        }
        Ok(())
    })
}

/// Peak metrics; fails with `Numerical` when the window held no interior peak.
///
/// # Safety
/// `spec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spinsme_spectrum_peak(
    spec: *const SpinsmeSpectrum,
    out: *mut SpinsmePeak,
) -> SpinsmeStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spectrum"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = s.peak.ok_or((
            SpinsmeStatus::Numerical,
            "no interior peak in the scanned window".to_string(),
        ))?;
        *out = p.into();
        Ok(())
    })
}

/// Shot-noise floor 2ηκ and zero-frequency line weight.
///
/// # Safety
/// `spec` must be a live handle; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn spinsme_spectrum_weights(
    spec: *const SpinsmeSpectrum,
    delta_weight: *mut f64,
    dc_weight: *mut f64,
) -> SpinsmeStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spectrum"))?;
        if let Some(d) = delta_weight.as_mut() {
            *d = s.result.delta_weight;
        }
        if let Some(d) = dc_weight.as_mut() {
            *d = s.result.dc_weight;
        }
        Ok(())
    })
}

/// # Safety
/// `spec` must come from `spinsme_spectrum_compute` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn spinsme_spectrum_free(spec: *mut SpinsmeSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}
