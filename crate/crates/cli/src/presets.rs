//! Built-in scenarios, stored as scenario files under `presets/`.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::scenario::{load_scenario, parse_scenario, Scenario};

pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! preset {
    ($name:literal) => {
        Preset { name: $name, source: include_str!(concat!("../presets/", $name, ".toml")) }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("fig2a"),
    preset!("fig2b"),
    preset!("fig2c"),
    preset!("fig2d"),
    preset!("fig2e"),
    preset!("fig2c_g0"),
    preset!("fig2d_g0"),
    preset!("fig2e_g0"),
    preset!("fig3a"),
    preset!("fig3b"),
];

impl Preset {
    /// First comment line of the preset file.
    pub fn description(&self) -> &'static str {
        self.source.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or("")
    }
}

pub fn load_preset(name: &str) -> Result<Scenario> {
    let preset = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Invalid(format!("`{name}` is neither a file nor a preset ({})", names.join(", ")))
    })?;
    parse_scenario(preset.source)
}

/// A scenario file path, or a preset name when no such file exists.
pub fn resolve(spec: &str) -> Result<Scenario> {
    let path = Path::new(spec);
    if path.is_file() {
        load_scenario(path)
    } else {
        load_preset(spec)
    }
}
