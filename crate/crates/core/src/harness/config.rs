//! Configuration files.
//!
//! A solve configuration is a JSON object
//!
//! ```json
//! { "schema_version": 1, "system": { "radar_sinr_db": 6.0 }, "sca": { "max_iters": 50 } }
//! ```
//!
//! where every key of `system` and `sca` is optional and defaults to the
//! reference scenario. A sweep file adds the sweep description around a base
//! system. Unknown keys anywhere are rejected and the error names the path of
//! the offending key.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::{HdConvention, Scheme};
use crate::sca::ScaSettings;
use crate::scenario::SystemConfig;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub sca: ScaSettings,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self { schema_version: SCHEMA_VERSION, system: SystemConfig::default(), sca: ScaSettings::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    RadarSinrDb,
    /// Sets `n_tx = n_rx`.
    NAntennas,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::RadarSinrDb => "radar_sinr_db",
            SweepVariable::NAntennas => "n_antennas",
        }
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> SystemConfig {
        match self {
            SweepVariable::RadarSinrDb => base.clone().with_radar_sinr_db(value),
            SweepVariable::NAntennas => base.clone().with_antennas(value as usize),
        }
    }
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub schema_version: u32,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    #[serde(default = "one")]
    pub n_seeds: usize,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub hd_convention: HdConvention,
    /// Seed `i` of the sweep uses `base_config.rng_seed + i`.
    #[serde(default)]
    pub base_config: SystemConfig,
    #[serde(default)]
    pub sca: ScaSettings,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        if self.grid.is_empty() {
            return Err(Error::Config("grid: must not be empty".into()));
        }
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds: must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes: must not be empty".into()));
        }
        for (i, &v) in self.grid.iter().enumerate() {
            let ok = match self.variable {
                SweepVariable::RadarSinrDb => v.is_finite(),
                SweepVariable::NAntennas => v >= 1.0 && v.fract() == 0.0,
            };
            if !ok {
                return Err(Error::Config(format!("grid[{i}]: {v} is not a valid {}", self.variable.name())));
            }
        }
        for &v in &self.grid {
            self.variable.apply(&self.base_config, v).validate()?;
        }
        self.sca.validate()
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n_seeds as u64).map(|i| self.base_config.rng_seed.wrapping_add(i))
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Config(format!("schema_version: unsupported version {v} (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

/// Deserializes JSON text, reporting the path of the first offending key.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path == "?" {
            Error::Config(inner.to_string())
        } else {
            Error::Config(format!("{path}: {inner}"))
        }
    })
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse_json(text)?;
        check_version(cfg.schema_version)?;
        cfg.system.validate()?;
        cfg.sca.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = parse_json(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}
