//! Run configuration file (TOML).
//!
//! ```toml
//! value_file = "game.hjiv"      # needed by game policies
//!
//! [pursuer]
//! kind = "lookahead"            # reactive | lookahead | game | search-track
//! steps = 8
//!
//! [evader]
//! kind = "dubins"               # dubins | random | game | noisy-game | straight
//!
//! [episode]
//! horizon = 20.0
//! seed = 0
//!
//! [sweep]
//! episodes = 500
//! workers = 4
//!
//! [output]
//! table = "sweep.csv"
//! summary = "summary.json"
//! trajectory = "episode.csv"
//! ```
//!
//! Every section is optional; missing fields take their defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::episode::EpisodeConfig;
use crate::error::{Error, Result};
use crate::evader::EvaderPolicySpec;
use crate::harness::DEFAULT_EPISODES;
use crate::pursuer::PursuerPolicySpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub episodes: usize,
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            episodes: DEFAULT_EPISODES,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub table: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub value_file: Option<PathBuf>,
    pub pursuer: PursuerPolicySpec,
    pub evader: EvaderPolicySpec,
    pub episode: EpisodeConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            value_file: None,
            pursuer: PursuerPolicySpec::reactive(),
            evader: EvaderPolicySpec::Random,
            episode: EpisodeConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.episode.validate()?;
        self.pursuer.validate()?;
        if self.sweep.episodes == 0 {
            return Err(Error::ConfigInvalid("sweep.episodes must be at least 1".into()));
        }
        if self.value_file.is_none() {
            if self.pursuer.needs_value() {
                return Err(Error::MissingValueFunction(self.pursuer.name()));
            }
            if self.evader.needs_value() {
                return Err(Error::MissingValueFunction(self.evader.name()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn documented_example_parses() {
        let cfg = RunConfig::from_toml_str(
            r#"
value_file = "game.hjiv"
[pursuer]
kind = "lookahead"
steps = 8
[evader]
kind = "noisy-game"
epsilon = 0.3
[episode]
horizon = 10.0
seed = 4
[sweep]
episodes = 50
workers = 2
[output]
table = "sweep.csv"
"#,
        )
        .unwrap();
        assert_eq!(cfg.pursuer, PursuerPolicySpec::Lookahead { steps: 8, gain: 3.0 });
        assert_eq!(cfg.evader, EvaderPolicySpec::NoisyGame { epsilon: 0.3 });
        assert_eq!(cfg.episode.horizon, 10.0);
        assert_eq!(cfg.episode.dt, 0.2);
        assert_eq!(cfg.sweep.workers, Some(2));
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.episode.seed = 9;
        cfg.output.summary = Some("s.json".into());
        assert_eq!(RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn rejects_invalid() {
        assert!(RunConfig::from_toml_str("[episode]\ngamma = 2.0").is_err());
        assert!(RunConfig::from_toml_str("[pursuer]\nkind = \"game\"").is_err());
        assert!(RunConfig::from_toml_str("[episode]\nhorizen = 5.0").is_err());
        assert!(RunConfig::from_toml_str("[episode.spawn]\nr_mid = 3.0").is_err());
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
    }
}
