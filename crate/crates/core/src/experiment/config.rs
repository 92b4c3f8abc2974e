use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fec::CodeRate;
use crate::mimo::{ChannelModel, Constellation, LosParams};
use crate::unfolding::{DatasetSpec, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ChannelSpec {
    Rayleigh,
    Los(LosParams),
}

impl From<ChannelSpec> for ChannelModel {
    fn from(c: ChannelSpec) -> Self {
        match c {
            ChannelSpec::Rayleigh => ChannelModel::Rayleigh,
            ChannelSpec::Los(p) => ChannelModel::Los(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    GbcdBox,
    GbcdPme,
    Lmmse,
    Ocd,
}

impl DetectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GbcdBox => "gbcd-box",
            Self::GbcdPme => "gbcd-pme",
            Self::Lmmse => "lmmse",
            Self::Ocd => "ocd",
        }
    }
}

/// Where GBCD-PME parameters come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmeSource {
    /// Parameter store file.
    Store(PathBuf),
    /// Train at every SNR point before simulating it.
    Train,
}

fn default_true() -> bool {
    true
}
fn default_block_size() -> usize {
    2
}
fn default_round() -> usize {
    32
}
fn default_min_block_errors() -> u64 {
    200
}
fn default_n_d() -> usize {
    120
}
fn default_iterations() -> usize {
    3
}

/// Experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub b: usize,
    pub u: usize,
    pub order: usize,
    pub snr_db: Vec<f64>,
    #[serde(default = "rayleigh")]
    pub channel: ChannelSpec,
    pub code_rate: CodeRate,
    /// Data subcarriers per codeword.
    #[serde(default = "default_n_d")]
    pub n_d: usize,
    /// Subcarriers sharing one channel realization; defaults to `n_d`.
    #[serde(default)]
    pub coherence_group: Option<usize>,
    pub detectors: Vec<DetectorKind>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    /// Maximum trials per SNR point.
    pub trials: usize,
    /// Stop a point once every detector reached this many block errors.
    #[serde(default = "default_min_block_errors")]
    pub min_block_errors: u64,
    /// Trials per round; early stopping is checked between rounds.
    #[serde(default = "default_round")]
    pub round: usize,
    #[serde(default)]
    pub fixed_point: bool,
    #[serde(default)]
    pub pme: Option<PmeSource>,
    /// Use GBCD-BOX when no PME parameters exist for a point.
    #[serde(default = "default_true")]
    pub allow_box_fallback: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Deep-unfolding training set size when `pme = "train"`.
    #[serde(default)]
    pub train_samples: Option<usize>,
}

fn rayleigh() -> ChannelSpec {
    ChannelSpec::Rayleigh
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.detectors.is_empty() {
            return fail("detector list is empty".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_db needs finite values".into());
        }
        if self.u == 0 || self.b < self.u {
            return fail(format!("need B >= U >= 1 (B = {}, U = {})", self.b, self.u));
        }
        if self.block_size == 0 || self.u % self.block_size != 0 {
            return fail(format!("U = {} not divisible by block size {}", self.u, self.block_size));
        }
        if self.iterations == 0 || self.round == 0 || self.n_d == 0 {
            return fail("iterations, round and n_d must be positive".into());
        }
        if self.coherence_group == Some(0) {
            return fail("coherence_group must be positive".into());
        }
        check_order(self.order)
    }

    pub fn group(&self) -> usize {
        self.coherence_group.unwrap_or(self.n_d).min(self.n_d)
    }

    pub fn model(&self) -> ChannelModel {
        self.channel.into()
    }
}

fn check_order(order: usize) -> Result<()> {
    Constellation::new(order)
        .map(|_| ())
        .map_err(|_| Error::Config(format!("unsupported modulation order {order}")))
}

fn default_train_samples() -> usize {
    2000
}
fn default_val_samples() -> usize {
    500
}
fn default_max_epochs() -> usize {
    100
}

/// Deep-unfolding job: one parameter record per SNR point. Unknown keys
/// are ignored, so a sweep config can be reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub seed: u64,
    pub b: usize,
    pub u: usize,
    pub order: usize,
    pub snr_db: Vec<f64>,
    #[serde(default = "rayleigh")]
    pub channel: ChannelSpec,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    #[serde(default = "default_train_samples")]
    pub train_samples: usize,
    #[serde(default = "default_val_samples")]
    pub val_samples: usize,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
}

impl TrainingConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.snr_db.is_empty() || cfg.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db needs finite values".into()));
        }
        if cfg.u == 0 || cfg.b < cfg.u || cfg.block_size == 0 || cfg.u % cfg.block_size != 0 {
            return Err(Error::Config(format!(
                "need B >= U >= 1 and U divisible by the block size (B = {}, U = {}, L = {})",
                cfg.b, cfg.u, cfg.block_size
            )));
        }
        if cfg.iterations == 0 || cfg.train_samples == 0 || cfg.val_samples == 0 || cfg.max_epochs == 0 {
            return Err(Error::Config("iterations, sample counts and max_epochs must be positive".into()));
        }
        check_order(cfg.order)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn dataset(&self, snr_db: f64) -> DatasetSpec {
        DatasetSpec {
            b: self.b,
            u: self.u,
            order: self.order,
            snr_db,
            model: self.channel.into(),
            block_size: self.block_size,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            iterations: self.iterations,
            train_samples: self.train_samples,
            val_samples: self.val_samples,
            max_epochs: self.max_epochs,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}
