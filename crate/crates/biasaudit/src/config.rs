//! Run configuration: built-in defaults, then an optional TOML file, then
//! command-line flags.

use std::path::{Path, PathBuf};

use biasaudit_core::leaning::{DEFAULT_MIN_FOLLOWINGS, DEFAULT_NEUTRAL_THRESHOLD};
use biasaudit_core::rankers::RankingStrategy;
use biasaudit_core::DEFAULT_PAGE_SIZE;
use serde::Deserialize;

use crate::sampling::DEFAULT_SAMPLE_SIZE;
use crate::synth::SynthConfig;

pub const DEFAULT_CANDIDATES: [f64; 5] = [0.01, 0.03, 0.05, 0.08, 0.1];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rank_depth: usize,
    pub threshold: f64,
    pub min_followings: usize,
    pub candidates: Vec<f64>,
    pub strategies: Vec<RankingStrategy>,
    pub seed: u64,
    pub sample_size: usize,
    pub paths: PathConfig,
    pub synth: SynthConfig,
}

/// Input and output locations; all optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub bundle: Option<PathBuf>,
    pub items: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub seeds_dem: Option<PathBuf>,
    pub seeds_rep: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    pub stream: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    pub content_judgments: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rank_depth: DEFAULT_PAGE_SIZE,
            threshold: DEFAULT_NEUTRAL_THRESHOLD,
            min_followings: DEFAULT_MIN_FOLLOWINGS,
            candidates: DEFAULT_CANDIDATES.to_vec(),
            strategies: vec![
                RankingStrategy::MostRetweetedFirst,
                RankingStrategy::MostFavoritedFirst,
            ],
            seed: 0,
            sample_size: DEFAULT_SAMPLE_SIZE,
            paths: PathConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rank_depth == 0 {
            return Err(ConfigError::Invalid("rank depth must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(ConfigError::Invalid(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if let Some(c) = self.candidates.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(ConfigError::Invalid(format!(
                "candidate threshold {c} outside [0, 1]"
            )));
        }
        if self.candidates.is_empty() {
            return Err(ConfigError::Invalid(
                "candidate threshold list is empty".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.rank_depth, 20);
        assert_eq!(c.threshold, 0.03);
        assert_eq!(c.min_followings, 10);
        assert_eq!(c.candidates, vec![0.01, 0.03, 0.05, 0.08, 0.1]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let c: RunConfig = toml::from_str(
            "rank_depth = 10\nstrategies = [\"most-retweeted\"]\n[paths]\nitems = \"x.jsonl\"\n[synth]\nseed = 4\n",
        )
        .unwrap();
        assert_eq!(c.rank_depth, 10);
        assert_eq!(c.threshold, 0.03);
        assert_eq!(c.strategies, vec![RankingStrategy::MostRetweetedFirst]);
        assert_eq!(c.paths.items, Some(PathBuf::from("x.jsonl")));
        assert_eq!(c.synth.seed, 4);
        assert_eq!(c.synth.n_users, SynthConfig::default().n_users);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(toml::from_str::<RunConfig>("rank_dept = 3").is_err());
        let c = RunConfig {
            threshold: 1.5,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
