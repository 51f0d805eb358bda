//! Experiment configuration files.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use mhd25_core::diagnostics::{DiagnosticsConfig, FitWindow};
use mhd25_core::initial::{InitialKind, InitialSpec};
use mhd25_core::solver::{Formulation, SolverConfig};
use mhd25_core::state::Params;
use mhd25_core::Grid;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest accepted grid size.
pub const MAX_N: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub box_length: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || self.n > MAX_N || !self.n.is_power_of_two() {
            return Err(CliError::Config(format!(
                "grid.n = {} must be a power of two in [16, {MAX_N}]",
                self.n
            )));
        }
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return Err(CliError::Config(format!("grid.box_length = {} must be positive", self.box_length)));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Grid> {
        self.validate()?;
        Ok(Grid::new(self.n, self.box_length)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    SingleMode {
        mode: [i64; 2],
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    RandomSpectrum {
        spectral_slope: f64,
        #[serde(default)]
        band_lo: f64,
        band_hi: f64,
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// A state written by `simulate`, given by its `.fld` path.
    File { path: PathBuf },
}

impl InitialData {
    /// Generator spec, or `None` for file input.
    pub fn spec(&self) -> Option<InitialSpec> {
        match *self {
            InitialData::SingleMode { mode, amplitude, seed } => Some(InitialSpec {
                kind: InitialKind::SingleMode { mode },
                amplitude,
                seed,
            }),
            InitialData::RandomSpectrum {
                spectral_slope,
                band_lo,
                band_hi,
                amplitude,
                seed,
            } => Some(InitialSpec {
                kind: InitialKind::RandomSpectrum {
                    spectral_slope,
                    band_lo,
                    band_hi,
                },
                amplitude,
                seed,
            }),
            InitialData::File { .. } => None,
        }
    }

    fn set_seed(&mut self, s: u64) {
        match self {
            InitialData::SingleMode { seed, .. } | InitialData::RandomSpectrum { seed, .. } => *seed = s,
            InitialData::File { .. } => {}
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(CliError::Config(format!("initial.{what}")));
        match self {
            InitialData::SingleMode { amplitude, .. } if !(amplitude.is_finite() && *amplitude >= 0.0) => {
                bad("amplitude must be finite and nonnegative")
            }
            InitialData::RandomSpectrum {
                spectral_slope,
                band_lo,
                band_hi,
                amplitude,
                ..
            } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    bad("amplitude must be finite and nonnegative")
                } else if !spectral_slope.is_finite() {
                    bad("spectral_slope must be finite")
                } else if !(*band_lo >= 0.0 && band_hi > band_lo) {
                    bad("band must satisfy 0 <= band_lo < band_hi")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Fit window; an absent `t_max` means the end of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindowSpec {
    pub t_min: f64,
    #[serde(default)]
    pub t_max: Option<f64>,
}

impl Default for FitWindowSpec {
    fn default() -> Self {
        Self { t_min: 10.0, t_max: None }
    }
}

impl FitWindowSpec {
    pub fn window(&self) -> FitWindow {
        FitWindow {
            t_min: self.t_min,
            t_max: self.t_max.unwrap_or(f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSpec {
    pub sigma: f64,
    pub gammas: Vec<f64>,
    pub fit_window: FitWindowSpec,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        let d = DiagnosticsConfig::default();
        Self {
            sigma: d.sigma,
            gammas: d.gammas,
            fit_window: FitWindowSpec::default(),
        }
    }
}

impl DiagnosticsSpec {
    pub fn config(&self) -> DiagnosticsConfig {
        DiagnosticsConfig {
            sigma: self.sigma,
            gammas: self.gammas.clone(),
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("mhd25-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub grid: GridSpec,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub solver: SolverConfig,
    pub initial: InitialData,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("not valid JSON: {e}")))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => return Err(CliError::Config(format!("unsupported schema_version {v}"))),
            None => return Err(CliError::Config("missing schema_version".into())),
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field that does not need a grid, then the step bound.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema_version {}", self.schema_version)));
        }
        self.grid.validate()?;
        self.params.validate()?;
        self.initial.validate()?;
        self.diagnostics.config().validate()?;
        let w = self.diagnostics.fit_window;
        if !(w.t_min >= 0.0 && w.t_max.is_none_or(|t| t > w.t_min)) {
            return Err(CliError::Config("fit_window needs 0 <= t_min < t_max".into()));
        }
        let k_max = PI * self.grid.n as f64 / self.grid.box_length;
        let s = &self.solver;
        if !(s.dt > 0.0 && s.dt.is_finite()) || !(s.t_end >= 0.0 && s.t_end.is_finite()) || s.snapshot_stride == 0 {
            return Err(CliError::Config("solver needs dt > 0, t_end >= 0 and snapshot_stride >= 1".into()));
        }
        if s.formulation != Formulation::Reformulated && s.dt > 0.5 / (k_max * k_max) {
            return Err(CliError::Config(format!(
                "dt = {} exceeds the explicit bound 0.5/k_max^2 = {}",
                s.dt,
                0.5 / (k_max * k_max)
            )));
        }
        Ok(())
    }

    /// Applies `--seed` and `--out`.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<&Path>) -> Self {
        if let Some(s) = seed {
            self.initial.set_seed(s);
            self.solver.seed = s;
        }
        if let Some(o) = out {
            self.output = o.to_path_buf();
        }
        self
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "linear-decay" => Some(decay_preset(1e-3, true)),
            "nonlinear-1e-3" => Some(decay_preset(1e-3, false)),
            "nonlinear-1e-2" => Some(decay_preset(1e-2, false)),
            _ => None,
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["linear-decay", "nonlinear-1e-3", "nonlinear-1e-2"]
    }
}

/// Decay runs on the large box with flat weighted low-frequency blocks (sigma = 1).
fn decay_preset(epsilon: f64, linear_only: bool) -> ExperimentConfig {
    let sigma = 1.0;
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        grid: GridSpec {
            n: 512,
            box_length: 128.0 * PI,
        },
        params: Params::default(),
        solver: SolverConfig {
            dt: 0.25,
            t_end: 200.0,
            formulation: Formulation::Reformulated,
            linear_only,
            snapshot_stride: 4,
            seed: 7,
            ..SolverConfig::default()
        },
        initial: InitialData::RandomSpectrum {
            spectral_slope: sigma - 1.0,
            band_lo: 0.0,
            band_hi: 1.0,
            amplitude: epsilon,
            seed: 7,
        },
        diagnostics: DiagnosticsSpec {
            sigma,
            gammas: vec![0.0, -0.5],
            fit_window: FitWindowSpec {
                t_min: 10.0,
                t_max: Some(200.0),
            },
        },
        output: default_output(),
    }
}

/// Eigenvalue sweep range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolSweep {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for SymbolSweep {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 1e3,
            points: 200,
        }
    }
}
