//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::MatchMode;
use crate::relext::{MissingParse, Strategy};
use crate::relnet::{Activation, OutputMode, RelNetConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NerSource {
    #[default]
    Gold,
    Model,
}

/// Which side of the document split a command works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPart {
    All,
    Train,
    Test,
}

impl std::str::FromStr for SplitPart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SplitPart::All),
            "train" => Ok(SplitPart::Train),
            "test" => Ok(SplitPart::Test),
            _ => Err(Error::Config(format!("unknown split part {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/models`.
    pub models_dir: Option<PathBuf>,
    pub strategy: Strategy,
    /// Strategies for `evaluate`; empty means all five.
    pub strategies: Vec<Strategy>,
    pub ner_mode: NerSource,
    pub tagger_model: Option<PathBuf>,
    pub relnet_model: Option<PathBuf>,
    /// Organization names, one per line, for the tagger's gazetteer feature.
    pub gazetteer: Option<PathBuf>,
    pub seed: u64,
    pub missing_parse: MissingParse,
    pub directed_patterns: bool,
    pub min_count: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub learning_rate: f64,
    pub relnet_epochs: usize,
    pub batch_size: usize,
    pub length_scale: f64,
    pub train_unrelated: bool,
    pub tagger_epochs: usize,
    /// Fraction of documents in the training part.
    pub split_fraction: f64,
    pub eval_split: SplitPart,
    pub match_mode: MatchMode,
    pub repetitions: usize,
    /// Extraction threads; 0 picks the number of cores.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nn = RelNetConfig::default();
        RunConfig {
            corpus_dir: PathBuf::from("corpus"),
            output_dir: PathBuf::from("out"),
            models_dir: None,
            strategy: Strategy::SdpConstrained,
            strategies: Vec::new(),
            ner_mode: NerSource::Gold,
            tagger_model: None,
            relnet_model: None,
            gazetteer: None,
            seed: 42,
            missing_parse: MissingParse::Fallback,
            directed_patterns: nn.directed,
            min_count: nn.min_count,
            hidden: nn.hidden,
            activation: nn.activation,
            learning_rate: nn.learning_rate,
            relnet_epochs: nn.epochs,
            batch_size: nn.batch_size,
            length_scale: nn.length_scale,
            train_unrelated: nn.train_unrelated,
            tagger_epochs: 10,
            split_fraction: 0.8,
            eval_split: SplitPart::Test,
            match_mode: MatchMode::Exact,
            repetitions: 3,
            workers: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&src).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.split_fraction) {
            return Err(Error::Config(format!(
                "split_fraction must be in [0, 1], got {}",
                self.split_fraction
            )));
        }
        if self.min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// SHA-256 over the settings that affect results. Output location and
    /// thread count are left out.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = PathBuf::new();
        canon.workers = 0;
        let json = serde_json::to_string(&canon).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn models_dir(&self) -> PathBuf {
        self.models_dir
            .clone()
            .unwrap_or_else(|| self.output_dir.join("models"))
    }

    pub fn tagger_path(&self) -> PathBuf {
        self.tagger_model
            .clone()
            .unwrap_or_else(|| self.models_dir().join("tagger.model"))
    }

    pub fn relnet_path(&self, mode: OutputMode) -> PathBuf {
        match &self.relnet_model {
            Some(p) if self.strategy.output_mode() == Some(mode) => p.clone(),
            _ => self.models_dir().join(format!("relnet-{mode}.model")),
        }
    }

    pub fn relnet_config(&self, mode: OutputMode) -> RelNetConfig {
        RelNetConfig {
            output_mode: mode,
            hidden: self.hidden,
            activation: self.activation,
            min_count: self.min_count,
            length_scale: self.length_scale,
            directed: self.directed_patterns,
            learning_rate: self.learning_rate,
            epochs: self.relnet_epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            train_unrelated: self.train_unrelated,
            config_hash: self.hash(),
        }
    }

    pub fn evaluated_strategies(&self) -> Vec<Strategy> {
        if self.strategies.is_empty() {
            Strategy::ALL.to_vec()
        } else {
            self.strategies.clone()
        }
    }
}

/// Seeded document-level split. Returns indices of the training part and
/// of the test part, each in ascending order.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((n as f64) * fraction).round() as usize;
    let mut train = order[..cut.min(n)].to_vec();
    let mut test = order[cut.min(n)..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
