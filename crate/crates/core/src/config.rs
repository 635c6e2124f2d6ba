//! Harness configuration. Every default is spelled out in
//! `data/defaults.toml`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::episode::EpisodeConfig;
use crate::fire::FireConfig;
use crate::frameworks::{FrameworkConfig, FrameworkKind};
use crate::levels::{find_level, level_names, seeds_at_least, LevelOverrides};
use crate::lm::HttpSettings;
use crate::metrics::BaselinePolicy;
use crate::terrain::GenConfig;
use crate::world::AgentParams;

pub const DEFAULTS_TOML: &str = include_str!("../data/defaults.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub framework: FrameworkKind,
    /// `mock:<script>` or `http`.
    pub lm: String,
    /// Level names; empty selects every level.
    pub levels: Vec<String>,
    /// Seeds used for every selected level; empty selects the canonical
    /// seeds of each level.
    pub seeds: Vec<u64>,
    pub seeds_per_level: usize,
    /// Replaces each level's step limit when set.
    pub max_steps: Option<u64>,
    pub max_retries: u32,
    pub out_dir: PathBuf,
    pub baseline_policy: BaselinePolicy,
    pub http: HttpSettings,
    pub gen: GenConfig,
    pub fire: FireConfig,
    pub agents: AgentParams,
    pub frameworks: FrameworkConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            framework: FrameworkKind::Camon,
            lm: "mock:omniscient".into(),
            levels: Vec::new(),
            seeds: Vec::new(),
            seeds_per_level: 3,
            max_steps: None,
            max_retries: 2,
            out_dir: PathBuf::from("runs"),
            baseline_policy: BaselinePolicy::Formula,
            http: HttpSettings::default(),
            gen: GenConfig::default(),
            fire: FireConfig::default(),
            agents: AgentParams::default(),
            frameworks: FrameworkConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unknown level `{name}`; valid levels: {valid}")]
    UnknownLevel { name: String, valid: String },
    #[error("no seeds selected")]
    NoSeeds,
}

impl HarnessConfig {
    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        let cfg: HarnessConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let s = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&s)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for l in &self.levels {
            if find_level(l).is_none() {
                return Err(ConfigError::UnknownLevel {
                    name: l.clone(),
                    valid: level_names().join("; "),
                });
            }
        }
        if self.seeds.is_empty() && self.seeds_per_level == 0 {
            return Err(ConfigError::NoSeeds);
        }
        Ok(())
    }

    /// Canonical catalog names of the selected levels.
    pub fn selected_levels(&self) -> Vec<&'static str> {
        if self.levels.is_empty() {
            return level_names();
        }
        self.levels
            .iter()
            .filter_map(|l| find_level(l))
            .map(|l| l.name)
            .collect()
    }

    pub fn seeds_for(&self, level: &str) -> Vec<u64> {
        if !self.seeds.is_empty() {
            return self.seeds.clone();
        }
        let mut s = seeds_at_least(level, self.seeds_per_level);
        s.truncate(self.seeds_per_level);
        s
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            overrides: LevelOverrides {
                gen: self.gen.clone(),
                agents: self.agents.clone(),
                max_steps: self.max_steps,
                roster: None,
            },
            fire: self.fire.clone(),
            framework: self.frameworks.clone(),
            max_retries: self.max_retries,
        }
    }
}
