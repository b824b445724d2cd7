//! Configuration file loading. A user file is merged key-by-key over the
//! shipped defaults, so it only needs the values it changes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::env::{Physics, ScenarioConfig, ScenarioFile, ScenarioGeometry, ScenarioName};
use crate::error::{Error, Result};
use crate::mpc::MpcConfig;
use crate::planner::{AgentConfig, HggConfig};

pub const DEFAULT_TOML: &str = include_str!("../../../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub physics: Physics,
    pub scenarios: BTreeMap<String, ScenarioGeometry>,
    pub agent: AgentConfig,
    pub hgg: HggConfig,
    pub mpc: MpcConfig,
    pub controller: ControllerConfig,
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Config {
    /// The shipped defaults.
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_TOML).expect("shipped config parses")
    }

    fn from_value(value: toml::Value) -> Result<Self> {
        let cfg: Config = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Value = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_value(value)
    }

    /// Parses `text` as overrides on top of the builtin defaults.
    pub fn overlay_str(text: &str) -> Result<Self> {
        let mut base: toml::Value = toml::from_str(DEFAULT_TOML).expect("shipped config parses");
        let over: toml::Value = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, over);
        Self::from_value(base)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::overlay_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Builtin defaults, or the file at `path` merged over them.
    pub fn load_or_builtin(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::builtin()),
        }
    }

    fn scenario_file(&self) -> ScenarioFile {
        ScenarioFile {
            physics: self.physics.clone(),
            scenarios: self.scenarios.clone(),
        }
    }

    pub fn scenario(&self, name: ScenarioName) -> Result<ScenarioConfig> {
        self.scenario_file().resolve(name)
    }

    pub fn validate(&self) -> Result<()> {
        let file = self.scenario_file();
        file.check_names()?;
        for key in self.scenarios.keys() {
            file.resolve(key.parse()?)?;
        }
        self.agent.validate()?;
        self.hgg.validate()?;
        self.controller.validate()?;
        if self.mpc.horizon < 2 {
            return Err(Error::Config("mpc.horizon must be >= 2".into()));
        }
        Ok(())
    }
}
