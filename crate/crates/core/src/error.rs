use thiserror::Error;

/// Errors produced anywhere in the simulator.
///
/// Variants are grouped so that the CLI can map them onto distinct exit codes:
/// input/validation problems, numerical aborts, and I/O.
#[derive(Debug, Error)]
pub enum SmeError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not Hermitian (max |A - A†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("negative rate {0} for a dissipative channel")]
    NegativeRate(f64),

    #[error("density matrix has trace {0}, expected 1")]
    NonUnitTrace(f64),

    #[error("resonant dispersive denominator for pair ({j}, {k}): |ω_c - (Ω_k - Ω_j)| = {denominator:.3e}")]
    Resonant {
        j: usize,
        k: usize,
        denominator: f64,
    },

    #[error("generator is unstable: eigenvalue with real part {0:.3e}")]
    Unstable(f64),

    #[error("steady state is ill-defined: {0}")]
    SteadyState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("validity check failed: {0}")]
    Validity(String),

    #[error("too many bath spins for exact enumeration ({0} > {1}); use a Gaussian bath")]
    BathTooLarge(usize, usize),

    #[error("numerical abort at t = {time}: {reason}")]
    NumericalAbort { time: f64, reason: String },

    #[error("Fock truncation leakage {0:.3e} exceeds the hard limit")]
    Truncation(f64),

    #[error("correlation tail not decayed: |R(τ_max)| / |R(0)| = {0:.3e}")]
    UndecayedTail(f64),

    #[error("no interior peak in scanned window: {0}")]
    NoPeak(String),

    #[error("record too short: {0}")]
    RecordTooShort(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SmeError {
    /// Numerical failures (as opposed to bad input) abort a run with a different exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SmeError::Unstable(_)
                | SmeError::SteadyState(_)
                | SmeError::NumericalAbort { .. }
                | SmeError::Truncation(_)
                | SmeError::UndecayedTail(_)
                | SmeError::NoPeak(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SmeError>;
