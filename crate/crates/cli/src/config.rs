use std::path::{Path, PathBuf};

use infogeo::cluster::{Init, KMeansOptions};
use infogeo::simulate::{ClassSpec, ScenarioConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Stage seed: the first eight bytes (little endian) of
/// `SHA-256(master.to_le_bytes() ‖ stage)`.
pub fn derive_seed(master: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawOrder", into = "RawOrder")]
pub enum BurgOrder {
    /// `n_pulses − 1`.
    Full,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawOrder {
    Fixed(usize),
    Named(String),
}

impl TryFrom<RawOrder> for BurgOrder {
    type Error = String;
    fn try_from(raw: RawOrder) -> std::result::Result<Self, String> {
        match raw {
            RawOrder::Fixed(m) => Ok(BurgOrder::Fixed(m)),
            RawOrder::Named(s) if s == "full" => Ok(BurgOrder::Full),
            RawOrder::Named(s) => Err(format!("order must be a count or \"full\", got {s:?}")),
        }
    }
}

impl From<BurgOrder> for RawOrder {
    fn from(o: BurgOrder) -> Self {
        match o {
            BurgOrder::Full => RawOrder::Named("full".into()),
            BurgOrder::Fixed(m) => RawOrder::Fixed(m),
        }
    }
}

impl BurgOrder {
    pub fn resolve(self, n_pulses: usize) -> usize {
        match self {
            BurgOrder::Full => n_pulses.saturating_sub(1),
            BurgOrder::Fixed(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgConfig {
    #[serde(default = "full_order")]
    pub order: BurgOrder,
    #[serde(default)]
    pub gamma: f64,
}

fn full_order() -> BurgOrder {
    BurgOrder::Full
}

impl Default for BurgConfig {
    fn default() -> Self {
        Self {
            order: BurgOrder::Full,
            gamma: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansConfig {
    pub k: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub init: Init,
    #[serde(default = "one")]
    pub restarts: usize,
    /// Defaults to a seed derived from the master seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_max_iter() -> usize {
    100
}

fn default_tol() -> f64 {
    1e-6
}

fn one() -> usize {
    1
}

impl KMeansConfig {
    pub fn options(&self, master: u64) -> KMeansOptions {
        KMeansOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            init: self.init,
            restarts: self.restarts,
            ..KMeansOptions::new(self.k, self.seed.unwrap_or_else(|| derive_seed(master, "kmeans")))
        }
    }
}

/// The scenario section; its seed defaults to one derived from the master
/// seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub n_pulses: usize,
    pub classes: Vec<ClassSpec>,
}

impl ScenarioSection {
    pub fn resolve(&self, master: u64) -> ScenarioConfig {
        ScenarioConfig {
            seed: self.seed.unwrap_or_else(|| derive_seed(master, "simulate")),
            n_pulses: self.n_pulses,
            classes: self.classes.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burst: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(default)]
    pub burg: BurgConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmeans: Option<KMeansConfig>,
    #[serde(default)]
    pub io: IoConfig,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.burg.gamma >= 0.0) || !self.burg.gamma.is_finite() {
            return Err(CliError::Config(format!("burg.gamma must be ≥ 0, got {}", self.burg.gamma)));
        }
        if let Some(s) = &self.scenario {
            s.resolve(self.seed)
                .validate()
                .map_err(|e| CliError::Config(format!("scenario: {e}")))?;
            if let BurgOrder::Fixed(m) = self.burg.order {
                if m >= s.n_pulses {
                    return Err(CliError::Config(format!(
                        "burg.order {m} needs fewer than n_pulses = {}",
                        s.n_pulses
                    )));
                }
            }
        }
        if let Some(k) = &self.kmeans {
            if k.k == 0 || k.max_iter == 0 || k.restarts == 0 || !(k.tol >= 0.0) {
                return Err(CliError::Config(
                    "kmeans needs k ≥ 1, max_iter ≥ 1, restarts ≥ 1 and tol ≥ 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Copy with derived stage seeds written out, so the echo reproduces the
    /// run even if the derivation changed.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if let Some(s) = &mut c.scenario {
            s.seed = Some(s.seed.unwrap_or_else(|| derive_seed(self.seed, "simulate")));
        }
        if let Some(k) = &mut c.kmeans {
            k.seed = Some(k.seed.unwrap_or_else(|| derive_seed(self.seed, "kmeans")));
        }
        c
    }

    pub fn scenario(&self) -> Result<ScenarioConfig> {
        self.scenario
            .as_ref()
            .map(|s| s.resolve(self.seed))
            .ok_or_else(|| CliError::Config("missing scenario section".into()))
    }

    pub fn kmeans_options(&self) -> Result<KMeansOptions> {
        self.kmeans
            .as_ref()
            .map(|k| k.options(self.seed))
            .ok_or_else(|| CliError::Config("missing kmeans section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "seed": 3,
        "scenario": {"n_pulses": 8, "classes": [{"name": "a", "p0": 1.0, "mu": [[0.5, 0.0]], "n_cells": 4}]},
        "burg": {"order": "full", "gamma": 0.0},
        "kmeans": {"k": 1, "init": "pp"}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = PipelineConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.burg.order, BurgOrder::Full);
        let k = c.kmeans.as_ref().unwrap();
        assert_eq!((k.max_iter, k.tol, k.restarts, k.init), (100, 1e-6, 1, Init::PlusPlus));
        assert_eq!(c.scenario().unwrap().seed, derive_seed(3, "simulate"));
        assert_eq!(c.kmeans_options().unwrap().seed, derive_seed(3, "kmeans"));
    }

    #[test]
    fn resolved_echo_round_trips() {
        let c = PipelineConfig::from_json(MINIMAL).unwrap().resolved();
        let text = serde_json::to_string(&c).unwrap();
        let back = PipelineConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.scenario().unwrap(), c.scenario().unwrap());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let typo = MINIMAL.replace("\"gamma\"", "\"gama\"");
        assert!(matches!(PipelineConfig::from_json(&typo), Err(CliError::Config(_))));
        let order = MINIMAL.replace("\"full\"", "\"max\"");
        assert!(PipelineConfig::from_json(&order).is_err());
        let too_high = MINIMAL.replace("\"full\"", "8");
        assert!(PipelineConfig::from_json(&too_high).is_err());
        let no_k = MINIMAL.replace("\"k\": 1", "\"k\": 0");
        assert!(PipelineConfig::from_json(&no_k).is_err());
    }

    #[test]
    fn seeds_differ_per_stage() {
        assert_ne!(derive_seed(1, "simulate"), derive_seed(1, "kmeans"));
        assert_ne!(derive_seed(1, "simulate"), derive_seed(2, "simulate"));
        assert_eq!(derive_seed(1, "kmeans"), derive_seed(1, "kmeans"));
    }
}
