//! Scenario documents: TOML with flat dotted keys, e.g.
//!
//! ```toml
//! name = "fig2d"
//! engines = ["volterra", "oracle"]
//! system.kappa = 0.1
//! system.delta_eff = 5.0
//! system.coupling_g = 0.3        # or [re, im]
//! system.g0 = 1e-4
//! bath.eta = 5e-3
//! bath.omega0 = 20.0
//! bath.s = 1.0
//! grid.dt = 2.5e-3               # optional, defaults to the 200-period grid
//! oracle.modes = 2000            # optional
//! detection.coupling_gs = 0.01   # optional table
//! sweep.parameter = "bath.eta"   # optional
//! sweep.values = [1e-3, 5e-3]
//! ```
//!
//! Unknown keys are rejected and every physical invariant is checked at
//! load time.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use squeezenm::oracle::MAX_MODES;
use squeezenm::{BathSpec, DetectionSpec, SystemSpec, TimeGrid};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Volterra,
    Markovian,
    Oracle,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Volterra => "volterra",
            Engine::Markovian => "markovian",
            Engine::Oracle => "oracle",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "volterra" => Ok(Engine::Volterra),
            "markovian" => Ok(Engine::Markovian),
            "oracle" => Ok(Engine::Oracle),
            other => Err(CliError::Invalid(format!("unknown engine `{other}` (volterra, markovian, oracle)"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Bath cutoff; 10 ω₀ when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substeps: Option<usize>,
}

fn default_modes() -> usize {
    2000
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { modes: default_modes(), omega_max: None, substeps: None }
    }
}

impl OracleSettings {
    pub fn cutoff(&self, bath: &BathSpec) -> f64 {
        self.omega_max.unwrap_or(10.0 * bath.omega0)
    }
}

/// Optional extra dumps of the Volterra engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub meanfield: bool,
    #[serde(default)]
    pub kernel: bool,
    #[serde(default)]
    pub green: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Dotted key of a numeric scenario field, e.g. `bath.eta`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub engines: Vec<Engine>,
    pub system: SystemSpec,
    pub bath: BathSpec,
    #[serde(default)]
    pub grid: TimeGrid,
    #[serde(default)]
    pub oracle: OracleSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: OutputSettings,
}

/// One sweep point: the resolved scenario and its file-name suffix.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub scenario: Scenario,
    pub label: Option<String>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    parse_scenario(&text).map_err(|e| e.in_file(path))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let ok_name = !self.name.is_empty()
            && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok_name {
            return Err(CliError::Invalid(format!(
                "name `{}` must be a nonempty identifier of letters, digits, `_` or `-`",
                self.name
            )));
        }
        if self.engines.is_empty() {
            return Err(CliError::Invalid("at least one engine must be selected".into()));
        }
        let mut sorted = self.engines.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.engines.len() {
            return Err(CliError::Invalid("engines must not repeat".into()));
        }
        if !(1..=MAX_MODES).contains(&self.oracle.modes) {
            return Err(CliError::Invalid(format!("oracle.modes must be in 1..={MAX_MODES}")));
        }
        if let Some(w) = self.oracle.omega_max {
            if !(w.is_finite() && w > 0.0) {
                return Err(CliError::Invalid(format!("oracle.omega_max must be > 0, got {w}")));
            }
        }
        if self.oracle.substeps == Some(0) {
            return Err(CliError::Invalid("oracle.substeps must be >= 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Invalid("sweep.values must not be empty".into()));
            }
            if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Invalid(format!("sweep.values must be finite, got {v}")));
            }
        }
        for point in self.points()? {
            point.scenario.validate_physics()?;
        }
        Ok(())
    }

    fn validate_physics(&self) -> Result<()> {
        self.system.validate()?;
        self.bath.validate()?;
        self.grid.validate()?;
        if let Some(det) = &self.detection {
            det.validate()?;
        }
        Ok(())
    }

    /// Rejects a bath that removes the whole static stiffness of the
    /// oscillator; every bath-coupled engine diverges for it.
    pub fn check_stability(&self) -> Result<()> {
        let bath_used = self.engines.iter().any(|e| *e != Engine::Markovian);
        let stiffness = 1.0 - 4.0 * self.bath.static_shift();
        if bath_used && stiffness <= 0.0 {
            return Err(squeezenm::Error::UnstableSpectrum { stiffness, frequency: (-stiffness).sqrt() }.into());
        }
        Ok(())
    }

    /// The scenario expanded over its sweep; a single unlabeled point
    /// without one.
    pub fn points(&self) -> Result<Vec<Point>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![Point { scenario: self.clone(), label: None }]);
        };
        let base = Scenario { sweep: None, ..self.clone() };
        sweep
            .values
            .iter()
            .map(|&v| {
                let scenario = base.with_value(&sweep.parameter, v)?;
                Ok(Point { scenario, label: Some(format!("{}={v}", sweep.parameter)) })
            })
            .collect()
    }

    /// Copy with the numeric field at dotted `path` set to `value`.
    pub fn with_value(&self, path: &str, value: f64) -> Result<Scenario> {
        let unknown = || CliError::Invalid(format!("sweep.parameter `{path}` is not a numeric scenario field"));
        let mut doc = toml::Value::try_from(self).map_err(|e| CliError::Parse(e.to_string()))?;
        let mut slot = &mut doc;
        for key in path.split('.') {
            slot = slot.as_table_mut().and_then(|t| t.get_mut(key)).ok_or_else(unknown)?;
        }
        *slot = match slot {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Integer(_) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
            _ => return Err(unknown()),
        };
        doc.try_into().map_err(|e: toml::de::Error| CliError::Invalid(format!("sweep {path}={value}: {e}")))
    }

    /// Flat dotted-key TOML; `parse_scenario` reads it back unchanged.
    pub fn to_flat_toml(&self) -> Result<String> {
        let doc = toml::Value::try_from(self).map_err(|e| CliError::Parse(e.to_string()))?;
        let mut out = String::new();
        flatten(&doc, "", &mut out);
        Ok(out)
    }
}

fn flatten(value: &toml::Value, prefix: &str, out: &mut String) {
    match value {
        toml::Value::Table(table) => {
            for (key, v) in table {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                flatten(v, &path, out);
            }
        }
        other => out.push_str(&format!("{prefix} = {other}\n")),
    }
}
