//! Configuration file handling: a flat TOML file with `[system]`,
//! `[sweep]` and `[output]` sections, plus `key=value` command-line
//! overrides. Missing keys fall back to the canonical parameter set.

use crate::measures::MeasureSelection;
use crate::model::{DetuningMode, ModelError, SystemParams};
use crate::output::OutputFormat;
use crate::sweep::{
    default_worker_count, AxisScale, BarnettBranches, SweepAxis, SweepSpec, SweptParam,
};
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown configuration key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("the configuration has no [sweep] section")]
    MissingSweep,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid sweep configuration: {0}")]
    Sweep(String),
}

/// `[system]` section; every key optional, defaulting to the canonical
/// parameter set. `omega_nu_thz = 30` means `omega_nu / 2 pi = 30 THz`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub omega_nu_thz: f64,
    pub delta_a: f64,
    pub delta_m: f64,
    pub delta_b: f64,
    pub j: f64,
    pub g_a: f64,
    pub g_m: f64,
    pub n_molecules: u64,
    pub kappa_a: f64,
    pub kappa_m: f64,
    pub gamma_nu: f64,
    pub drive: f64,
    pub temperature_k: f64,
    pub detuning_mode: DetuningMode,
}

impl Default for SystemSection {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            omega_nu_thz: p.omega_nu / (2.0 * PI * 1e12),
            delta_a: p.delta_a,
            delta_m: p.delta_m,
            delta_b: p.delta_b,
            j: p.j_coupling,
            g_a: p.g_a,
            g_m: p.g_m,
            n_molecules: p.n_molecules,
            kappa_a: p.kappa_a,
            kappa_m: p.kappa_m,
            gamma_nu: p.gamma_nu,
            drive: p.drive,
            temperature_k: p.temperature,
            detuning_mode: p.detuning_mode,
        }
    }
}

/// `[sweep]` section describing a single-axis sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: AxisScale,
    #[serde(default)]
    pub branches: BarnettBranches,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// `[output]` section.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Option<OutputFormat>,
    pub meta: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub system: SystemSection,
    pub sweep: Option<SweepSection>,
    pub output: Option<OutputSection>,
}

impl Config {
    /// Loads a config file, or the built-in defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                Self::parse(&text)
            }
        }
    }

    /// Parses TOML text; parse errors carry toml's line/column diagnostics.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Applies one `key=value` override. System keys may be bare or
    /// `system.`-prefixed; sweep and output keys use the `sweep.` /
    /// `output.` prefixes.
    pub fn apply_override(&mut self, expr: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = expr.split_once('=') else {
            return Err(ConfigError::InvalidValue {
                key: expr.to_string(),
                value: String::new(),
                reason: "expected key=value".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if let Some(rest) = key.strip_prefix("sweep.") {
            return self.apply_sweep_override(rest, value);
        }
        if let Some(rest) = key.strip_prefix("output.") {
            return self.apply_output_override(rest, value);
        }
        let bare = key.strip_prefix("system.").unwrap_or(key);
        self.apply_system_override(bare, value)
    }

    fn apply_system_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let parse_f64 = |v: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>().map_err(|e| ConfigError::InvalidValue {
                key: key.to_string(),
                value: v.to_string(),
                reason: e.to_string(),
            })
        };
        let s = &mut self.system;
        match key {
            "omega_nu_thz" => s.omega_nu_thz = parse_f64(value)?,
            "delta_a" => s.delta_a = parse_f64(value)?,
            "delta_m" => s.delta_m = parse_f64(value)?,
            "delta_b" => s.delta_b = parse_f64(value)?,
            "j" => s.j = parse_f64(value)?,
            "g_a" => s.g_a = parse_f64(value)?,
            "g_m" => s.g_m = parse_f64(value)?,
            "n_molecules" => {
                // accept 1e7-style counts as long as they are integral
                let v = parse_f64(value)?;
                if v < 1.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
                    return Err(ConfigError::InvalidValue {
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "must be a positive integer".into(),
                    });
                }
                s.n_molecules = v as u64;
            }
            "kappa_a" => s.kappa_a = parse_f64(value)?,
            "kappa_m" => s.kappa_m = parse_f64(value)?,
            "gamma_nu" => s.gamma_nu = parse_f64(value)?,
            "drive" => s.drive = parse_f64(value)?,
            "temperature_k" => s.temperature_k = parse_f64(value)?,
            "detuning_mode" => {
                s.detuning_mode = match value {
                    "effective" => DetuningMode::Effective,
                    "bare" => DetuningMode::Bare,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            key: key.to_string(),
                            value: other.to_string(),
                            reason: "expected `effective` or `bare`".into(),
                        })
                    }
                }
            }
            other => {
                return Err(ConfigError::UnknownKey {
                    key: other.to_string(),
                })
            }
        }
        Ok(())
    }

    fn apply_sweep_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let Some(sweep) = self.sweep.as_mut() else {
            return Err(ConfigError::MissingSweep);
        };
        let invalid = |reason: String| ConfigError::InvalidValue {
            key: format!("sweep.{key}"),
            value: value.to_string(),
            reason,
        };
        match key {
            "axis" => sweep.axis = value.to_string(),
            "min" => {
                sweep.min = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| invalid(e.to_string()))?
            }
            "max" => {
                sweep.max = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| invalid(e.to_string()))?
            }
            "points" => {
                sweep.points = value
                    .parse()
                    .map_err(|e: std::num::ParseIntError| invalid(e.to_string()))?
            }
            "scale" => {
                sweep.scale = match value {
                    "linear" => AxisScale::Linear,
                    "log" => AxisScale::Log,
                    _ => return Err(invalid("expected `linear` or `log`".into())),
                }
            }
            "branches" => {
                sweep.branches = match value {
                    "both" => BarnettBranches::Both,
                    "positive" => BarnettBranches::Positive,
                    "negative" => BarnettBranches::Negative,
                    _ => return Err(invalid("expected `both`, `positive` or `negative`".into())),
                }
            }
            "workers" => {
                sweep.workers = Some(
                    value
                        .parse()
                        .map_err(|e: std::num::ParseIntError| invalid(e.to_string()))?,
                )
            }
            other => {
                return Err(ConfigError::UnknownKey {
                    key: format!("sweep.{other}"),
                })
            }
        }
        Ok(())
    }

    fn apply_output_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let output = self.output.get_or_insert_with(OutputSection::default);
        match key {
            "path" => output.path = Some(value.to_string()),
            "format" => {
                output.format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => {
                        return Err(ConfigError::InvalidValue {
                            key: "output.format".into(),
                            value: value.to_string(),
                            reason: "expected `csv` or `json`".into(),
                        })
                    }
                })
            }
            "meta" => {
                output.meta = Some(value.parse().map_err(|e: std::str::ParseBoolError| {
                    ConfigError::InvalidValue {
                        key: "output.meta".into(),
                        value: value.to_string(),
                        reason: e.to_string(),
                    }
                })?)
            }
            other => {
                return Err(ConfigError::UnknownKey {
                    key: format!("output.{other}"),
                })
            }
        }
        Ok(())
    }

    /// Physical parameters from the `[system]` section, validated.
    pub fn system_params(&self) -> Result<SystemParams, ConfigError> {
        let s = &self.system;
        let params = SystemParams {
            omega_nu: 2.0 * PI * s.omega_nu_thz * 1e12,
            delta_a: s.delta_a,
            delta_m: s.delta_m,
            delta_b: s.delta_b,
            j_coupling: s.j,
            g_a: s.g_a,
            g_m: s.g_m,
            n_molecules: s.n_molecules,
            kappa_a: s.kappa_a,
            kappa_m: s.kappa_m,
            gamma_nu: s.gamma_nu,
            drive: s.drive,
            temperature: s.temperature_k,
            detuning_mode: s.detuning_mode,
        };
        params.validate()?;
        Ok(params)
    }

    /// Sweep spec from the `[system]` + `[sweep]` sections.
    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let section = self.sweep.as_ref().ok_or(ConfigError::MissingSweep)?;
        let param = SweptParam::from_str(&section.axis).map_err(|e| ConfigError::InvalidValue {
            key: "sweep.axis".into(),
            value: section.axis.clone(),
            reason: e.to_string(),
        })?;
        let spec = SweepSpec {
            base: self.system_params()?,
            axes: vec![SweepAxis {
                param,
                min: section.min,
                max: section.max,
                points: section.points,
                scale: section.scale,
            }],
            barnett_branches: section.branches,
            measures: MeasureSelection::all(),
            worker_count: section.workers.unwrap_or_else(default_worker_count),
        };
        spec.validate()
            .map_err(|e| ConfigError::Sweep(e.to_string()))?;
        Ok(spec)
    }
}
