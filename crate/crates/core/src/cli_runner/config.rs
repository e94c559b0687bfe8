use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::RunManifest;
use crate::dispersive_frame::{DriveParams, Efficiency, FrameSettings, LeakRate, SystemModel};
use crate::error::{Result, SmeError};
use crate::operator_core::algebra::{self, c, Operator, C64};
use crate::operator_core::InitialState;
use crate::sme_engine::{Quadrature, SimParams};
use crate::spectroscopy::{Rescale, TauGrid, WelchSettings};
use crate::spin_bath::{field_strength, BathSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// How the tuning field is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldMode {
    /// Recentre the gap from the drive, coupling and bath mean.
    #[default]
    Auto,
    Explicit {
        value: f64,
    },
    /// No tuning field.
    Off,
}

/// System–bath coupling operator S.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    SigmaZ,
    SigmaX,
}

impl Coupling {
    fn operator(self) -> Operator {
        match self {
            Coupling::SigmaZ => algebra::sigma_z(),
            Coupling::SigmaX => algebra::sigma_x(),
        }
    }
}

/// Two-level system with λ = γσ_x, driven cavity and homodyne detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// [Ω₁, Ω₂]
    pub levels: [f64; 2],
    pub gamma: f64,
    #[serde(default)]
    pub coupling: Coupling,
    pub omega_c: f64,
    pub omega_p: f64,
    /// ξ as [re, im]
    pub xi: [f64; 2],
    pub kappa: f64,
    pub eta: f64,
    pub phi: f64,
    #[serde(default)]
    pub delta: f64,
    /// α as [re, im]; omitted means ξ/(iκ).
    #[serde(default)]
    pub alpha: Option<[f64; 2]>,
    #[serde(default)]
    pub field: FieldMode,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub frame: FrameSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub spec: BathSpec,
    /// Probability that two systems see the same bath draw.
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub quadrature: Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl OmegaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 3 || !(self.max > self.min) {
            return Err(SmeError::Config(format!(
                "ω grid needs max > min and ≥ 3 points, got {self:?}"
            )));
        }
        let h = (self.max - self.min) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| self.min + h * k as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Coupling of every bath spin.
    G,
    /// Gaussian width parameter.
    V,
    Gamma,
    Kappa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub tau: TauGrid,
    pub omega: OmegaGrid,
    pub rescale: Rescale,
    pub peak_window: Option<[f64; 2]>,
    pub welch: WelchSettings,
    pub sweep: Option<SweepConfig>,
    /// Density-matrix entries (0-based row, column) written by `trajectory`.
    pub entries: Vec<[usize; 2]>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            tau: TauGrid {
                dtau: 0.01,
                steps: 4000,
            },
            omega: OmegaGrid {
                min: 0.0,
                max: 6.0,
                points: 601,
            },
            rescale: Rescale::default(),
            peak_window: None,
            welch: WelchSettings::default(),
            sweep: None,
            entries: vec![[0, 0], [0, 1]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub system: SystemConfig,
    pub bath: BathConfig,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn complex(v: [f64; 2]) -> C64 {
    c(v[0], v[1])
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| SmeError::Config(e.to_string()))?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    /// TOML config, or a JSON run manifest whose config and seed are reused.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: RunManifest =
                serde_json::from_str(&text).map_err(|e| SmeError::Config(e.to_string()))?;
            let mut cfg = m.config;
            cfg.sim.seed = m.seed;
            cfg.check_schema()?;
            return Ok(cfg);
        }
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SmeError::Config(e.to_string()))
    }

    fn check_schema(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SmeError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        Ok(())
    }

    pub fn drive(&self) -> Result<DriveParams> {
        let s = &self.system;
        Ok(DriveParams {
            omega_c: s.omega_c,
            omega_p: s.omega_p,
            xi: complex(s.xi),
            kappa: LeakRate::new(s.kappa)?,
            eta: Efficiency::new(s.eta)?,
            phi: s.phi,
            delta: s.delta,
            alpha: s.alpha.map(complex),
        })
    }

    /// The model with its tuning field, and the field value used (if any).
    pub fn model(&self) -> Result<(SystemModel, Option<f64>)> {
        let s = &self.system;
        let m = SystemModel::new(
            algebra::diag(&s.levels),
            algebra::sigma_x() * c(s.gamma, 0.0),
            s.coupling.operator(),
            self.drive()?,
        )?;
        match s.field {
            FieldMode::Off => Ok((m, None)),
            FieldMode::Explicit { value } => Ok((m.with_tuning_field(value)?, Some(value))),
            FieldMode::Auto => {
                let v = field_strength(&m, &self.bath.spec)?;
                Ok((m.with_tuning_field(v)?, Some(v)))
            }
        }
    }

    /// Copy with one sweep coordinate replaced.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        match axis {
            SweepAxis::G => match &mut cfg.bath.spec {
                BathSpec::Discrete { g, .. } => g.iter_mut().for_each(|x| *x = value),
                _ => return Err(SmeError::Config("axis g needs a discrete bath".into())),
            },
            SweepAxis::V => match &mut cfg.bath.spec {
                BathSpec::GaussianStatic { v } | BathSpec::GaussianScaled { v, .. } => *v = value,
                _ => return Err(SmeError::Config("axis v needs a Gaussian bath".into())),
            },
            SweepAxis::Gamma => cfg.system.gamma = value,
            SweepAxis::Kappa => cfg.system.kappa = value,
        }
        Ok(cfg)
    }
}
