//! Run configuration, loaded from TOML.
//!
//! ```toml
//! seed = 7
//! feed_forward = true
//! output_dir = "out"
//! emit = ["counts", "choi", "states", "report"]
//!
//! [plan]
//! phases = [0.0, 1.5707963267948966]
//! input_states = ["0", "1", "+", "-", "+i", "-i"]
//! bases = ["Z", "X", "Y"]
//!
//! [noise]
//! visibility = 0.95
//! ```
//!
//! Omitted sections and fields take the defaults of [`ExperimentPlan`] and
//! [`NoiseConfig`]; unknown keys are rejected.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use phasegate::sim::{ExperimentPlan, NoiseConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Counts,
    Choi,
    States,
    Report,
}

impl Emit {
    pub const ALL: [Emit; 4] = [Emit::Counts, Emit::Choi, Emit::States, Emit::Report];

    pub fn parse_list(list: &str) -> Result<BTreeSet<Emit>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "counts" => Ok(Emit::Counts),
                "choi" => Ok(Emit::Choi),
                "states" => Ok(Emit::States),
                "report" => Ok(Emit::Report),
                other => Err(CliError::Config(format!(
                    "invalid value for `emit`: unknown artifact `{other}` (expected counts, choi, states, report)"
                ))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub plan: ExperimentPlan,
    pub noise: NoiseConfig,
    pub seed: Option<u64>,
    pub feed_forward: bool,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plan: ExperimentPlan::standard(),
            noise: NoiseConfig::calibrated(),
            seed: None,
            feed_forward: true,
            output_dir: PathBuf::from("out"),
            emit: Emit::ALL.into_iter().collect(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        self.noise.validate()?;
        Ok(())
    }

    /// The seed, which every simulation must have.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            CliError::Config(
                "invalid value for `seed`: a seed is required to simulate (set `seed` or pass --seed)".into(),
            )
        })
    }

    pub fn emits(&self, what: Emit) -> bool {
        self.emit.contains(&what)
    }
}
