//! The `signal-test` run configuration and its TOML form.

use std::path::{Path, PathBuf};

use pqcm_core::pqcm::{construct_machine, max_uniform_gamma, IllegalClonerSpec, DEFAULT_GAMMA_TOL};
use pqcm_core::signalling::{A2Choice, Cloner, ProtocolConfig, DEFAULT_MU};
use pqcm_core::{AliceBasis, Ket};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::states::{ket_from_interleaved, read_states};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Where the state list comes from. Exactly one of `file` and `inline`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Interleaved re/im amplitudes, one list per state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<Vec<Vec<f64>>>,
    /// One-based indices of the states Bob's pairs are built from; all states
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob: Option<Vec<usize>>,
}

/// A state given either by its one-based index in the state list or by
/// interleaved amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Index(usize),
    Amplitudes(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum A2Config {
    #[default]
    Fourier,
    Target {
        state: StateRef,
    },
    Basis {
        vectors: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MachineConfig {
    /// A physical PQCM for Bob's states; uniform efficiency, the largest
    /// feasible one when `gamma` is absent.
    Legal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    /// The label-aware cloner; `clonable` holds one-based labels and defaults
    /// to `1..=N+1`.
    Illegal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clonable: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub trials: u64,
    #[serde(default = "default_mu")]
    pub mu: usize,
    #[serde(default = "default_pairs_per_bit")]
    pub pairs_per_bit: usize,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Length of a random message to send through the channel, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_bits: Option<usize>,
    pub states: StatesConfig,
    #[serde(default)]
    pub a2: A2Config,
    pub machine: MachineConfig,
}

fn default_mu() -> usize {
    DEFAULT_MU
}

fn default_pairs_per_bit() -> usize {
    1
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        // Relative state files are resolved against the config's directory.
        if let (Some(file), Some(dir)) = (&config.states.file, path.parent()) {
            if file.is_relative() {
                config.states.file = Some(dir.join(file));
            }
        }
        Ok(config)
    }

    fn all_states(&self) -> Result<Vec<Ket>, CliError> {
        match (&self.states.file, &self.states.inline) {
            (Some(file), None) => read_states(file),
            (None, Some(rows)) => rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    ket_from_interleaved(r).map_err(|m| CliError::Config(format!("inline state {}: {m}", i + 1)))
                })
                .collect(),
            _ => Err(CliError::Config(
                "give exactly one of states.file and states.inline".into(),
            )),
        }
    }

    /// Resolves files and references into a protocol configuration.
    pub fn protocol(&self) -> Result<ProtocolConfig, CliError> {
        let all = self.all_states()?;
        let pick = |i: usize| {
            all.get(i.wrapping_sub(1))
                .cloned()
                .ok_or_else(|| CliError::Config(format!("state index {i} outside 1..={}", all.len())))
        };
        let bob: Vec<Ket> = match &self.states.bob {
            Some(idx) => idx.iter().map(|&i| pick(i)).collect::<Result<_, _>>()?,
            None => all.clone(),
        };
        let n = bob.len();
        let a2 = match &self.a2 {
            A2Config::Fourier => A2Choice::Fourier,
            A2Config::Target {
                state: StateRef::Index(i),
            } => A2Choice::Target(pick(*i)?),
            A2Config::Target {
                state: StateRef::Amplitudes(v),
            } => A2Choice::Target(ket_from_interleaved(v).map_err(|m| CliError::Config(format!("a2 target: {m}")))?),
            A2Config::Basis { vectors } => {
                let kets = vectors
                    .iter()
                    .map(|v| ket_from_interleaved(v).map_err(|m| CliError::Config(format!("a2 basis: {m}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                A2Choice::Basis(AliceBasis::custom(kets)?)
            }
        };
        let cloner = match &self.machine {
            MachineConfig::Legal { gamma } => {
                let g = match gamma {
                    Some(g) => *g,
                    None => max_uniform_gamma(&bob, self.mu, DEFAULT_GAMMA_TOL)?,
                };
                Cloner::Legal(construct_machine(&bob, self.mu, &vec![g; n])?)
            }
            MachineConfig::Illegal { clonable } => {
                let labels: Vec<usize> = match clonable {
                    Some(l) => l
                        .iter()
                        .map(|&x| {
                            x.checked_sub(1)
                                .ok_or_else(|| CliError::Config("clonable labels are one-based".into()))
                        })
                        .collect::<Result<_, _>>()?,
                    None => (0..=n).collect(),
                };
                Cloner::Illegal(IllegalClonerSpec::new(n, &labels, self.mu)?)
            }
        };
        Ok(ProtocolConfig::new(
            bob,
            a2,
            self.mu,
            self.trials,
            self.pairs_per_bit,
            cloner,
            self.seed,
        )?)
    }
}
