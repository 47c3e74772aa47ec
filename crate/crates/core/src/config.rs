//! Experiment configuration files.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::code::{bitflip_code, five_qubit_code, trivial_code, CodeDefinition, StabilizerCode};
use crate::error::{Error, Result};
use crate::fit::Weighting;
use crate::logical::RecoveryMode;
use crate::rb::{RbConfig, RecoveryTiming, SpamSpec};

/// A built-in code by name, or a full definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSpec {
    Named(String),
    Custom(CodeDefinition),
}

impl CodeSpec {
    pub fn resolve(&self) -> Result<StabilizerCode> {
        match self {
            CodeSpec::Named(name) => match name.as_str() {
                "bitflip" | "bit_flip" => Ok(bitflip_code()),
                "five_qubit" => Ok(five_qubit_code()),
                "trivial" => Ok(trivial_code()),
                other => Err(Error::InvalidCode(format!(
                    "unknown code {other:?} (expected bitflip, five_qubit, trivial or a definition)"
                ))),
            },
            CodeSpec::Custom(def) => StabilizerCode::from_definition(def),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meas: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_noise: Option<ChannelSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Dataset,
    Fit,
    Oracle,
    Figures,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_emit() -> BTreeSet<Emit> {
    [Emit::Dataset].into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    pub noise: ChannelSpec,
    pub recovery: RecoveryMode,
    #[serde(default)]
    pub recovery_timing: RecoveryTiming,
    #[serde(default)]
    pub spam: SpamConfig,
    pub sequence_lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub shots_per_sequence: usize,
    /// Required; there is no implicit entropy source.
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bootstrap: Option<usize>,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_emit")]
    pub emit: BTreeSet<Emit>,
}

/// 1-based line of the first occurrence of `"key"` in `text`.
pub fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn at(text: &str, key: &str, e: Error) -> Error {
    Error::Config { line: line_of_key(text, key), msg: format!("{key}: {e}") }
}

impl ExperimentConfig {
    /// Parses and validates a config file. Errors carry the line of the
    /// offending entry where one can be found.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse_with_seed(text, None)
    }

    /// As [`parse`](Self::parse), with the seed replaced when `seed` is given.
    pub fn parse_with_seed(text: &str, seed: Option<u64>) -> Result<ExperimentConfig> {
        let mut config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config { line: Some(e.line()), msg: e.to_string() })?;
        if seed.is_some() {
            config.seed = seed;
        }
        config.check(text)?;
        Ok(config)
    }

    fn check(&self, text: &str) -> Result<()> {
        if self.seed.is_none() {
            return Err(Error::Config {
                line: line_of_key(text, "seed").or(Some(1)),
                msg: "seed: a seed is required".into(),
            });
        }
        self.build(text).map(|_| ())
    }

    /// The simulation configuration this file describes.
    pub fn rb_config(&self) -> Result<RbConfig> {
        self.build("")
    }

    fn build(&self, text: &str) -> Result<RbConfig> {
        let seed = self.seed.ok_or_else(|| Error::Config { line: None, msg: "seed: a seed is required".into() })?;
        let code = self.code.resolve().map_err(|e| at(text, "code", e))?;
        let noise = self.noise.build().map_err(|e| at(text, "noise", e))?;
        let build = |key: &str, spec: &Option<ChannelSpec>| spec.as_ref().map(|s| s.build().map_err(|e| at(text, key, e))).transpose();
        let spam = SpamSpec {
            prep: build("prep", &self.spam.prep)?,
            meas: build("meas", &self.spam.meas)?,
            recovery_noise: build("recovery_noise", &self.spam.recovery_noise)?,
        };
        let config = RbConfig {
            code,
            noise,
            recovery: self.recovery,
            recovery_timing: self.recovery_timing,
            spam,
            sequence_lengths: self.sequence_lengths.clone(),
            sequences_per_length: self.sequences_per_length,
            shots_per_sequence: self.shots_per_sequence,
            master_seed: seed,
        };
        if let Err(e) = config.validate() {
            let key = match e {
                Error::Dimension { .. } => "noise",
                Error::InsufficientDesign(_) if self.sequences_per_length == 0 => "sequences_per_length",
                Error::InsufficientDesign(_) if self.shots_per_sequence == 0 => "shots_per_sequence",
                _ => "sequence_lengths",
            };
            return Err(at(text, key, e));
        }
        Ok(config)
    }
}
