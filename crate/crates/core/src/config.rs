//! Experiment configuration (TOML).
//!
//! The checked-in `config/default.toml` is compiled in, so every command has
//! complete defaults; a user file replaces it wholesale.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuralnet::{NetworkSpec, Optimizer, TrainConfig};
use crate::synthgen::{Case1Spec, RandomWalk};
use crate::transforms::{Range, RhgParams, RhoLawMode};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub rhg: RhgParams,
    pub case1: Case1Config,
    pub case2: Case2Config,
    pub train: TrainSection,
    pub reproduce: ReproduceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case1Config {
    pub n: usize,
    pub phi_range: [f64; 2],
    pub sh_range: [f64; 2],
    pub noise_sigma: f64,
    pub testlog_n: usize,
    pub phi_step: f64,
    pub sh_step: f64,
    pub ladder: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case2Config {
    pub n_per_lith: usize,
    pub mode: String,
    pub block_len: usize,
    pub ladder: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub val_fraction: f64,
    pub patience: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceConfig {
    pub corpus_seed: u64,
    pub testlog_seed: u64,
    pub seeds: Vec<u64>,
}

impl Config {
    pub fn embedded() -> Self {
        Config::from_toml(DEFAULT_CONFIG).expect("built-in config parses")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| Error::parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        self.rhg.validate()?;
        self.train_config(0).validate()?;
        self.case2_mode()?;
        self.case1_ladder(0)?;
        self.case2_ladder(0)?;
        Ok(())
    }

    pub fn case1_spec(&self) -> Case1Spec {
        let c = &self.case1;
        Case1Spec {
            n: c.n,
            phi_range: Range::new(c.phi_range[0], c.phi_range[1]),
            sh_range: Range::new(c.sh_range[0], c.sh_range[1]),
            rhg: self.rhg,
            noise_sigma: c.noise_sigma,
        }
    }

    pub fn case1_walk(&self) -> RandomWalk {
        RandomWalk {
            phi_step: self.case1.phi_step,
            sh_step: self.case1.sh_step,
            ..RandomWalk::default()
        }
    }

    pub fn case2_mode(&self) -> Result<RhoLawMode> {
        self.case2.mode.parse()
    }

    pub fn train_config(&self, shuffle_seed: u64) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            optimizer: Optimizer::Adam {
                beta1: t.beta1,
                beta2: t.beta2,
                eps: t.eps,
            },
            val_fraction: t.val_fraction,
            patience: t.patience,
            shuffle_seed,
        }
    }

    /// Case I ladder as network specs (3 inputs, 1 target).
    pub fn case1_ladder(&self, init_seed: u64) -> Result<Vec<NetworkSpec>> {
        ladder(&self.case1.ladder, 3, 1, init_seed)
    }

    /// Case II ladder as network specs (2 inputs, 2 targets).
    pub fn case2_ladder(&self, init_seed: u64) -> Result<Vec<NetworkSpec>> {
        ladder(&self.case2.ladder, 2, 2, init_seed)
    }
}

fn ladder(entries: &[String], inputs: usize, outputs: usize, seed: u64) -> Result<Vec<NetworkSpec>> {
    entries
        .iter()
        .map(|s| NetworkSpec::new(inputs, NetworkSpec::parse_hidden(s)?, outputs, seed))
        .collect()
}
