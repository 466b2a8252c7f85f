//! Training settings resolved from three layers: built-in defaults, an
//! optional flat `key = value` file, then command-line flags.

use std::path::Path;

use stressdet::data::MAX_LEN;
use stressdet::layers::Arch;
use stressdet::train::TrainConfig;
use stressdet::{Error, Result};

/// Fully resolved training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub arch: Arch,
    pub attention: bool,
    pub hidden: usize,
    pub embed_dim: usize,
    pub dropout: f64,
    pub max_len: usize,
    pub min_count: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub pretrain_iterations: usize,
    pub tweets_per_class: usize,
    pub pretrain_epochs: usize,
    pub epochs: usize,
    pub patience: usize,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            arch: Arch::Blstm,
            attention: true,
            hidden: 64,
            embed_dim: 100,
            dropout: 0.2,
            max_len: MAX_LEN,
            min_count: 1,
            batch_size: t.batch_size,
            lr: t.learning_rate,
            pretrain_iterations: t.pretrain_iterations,
            tweets_per_class: t.tweets_per_class,
            pretrain_epochs: t.pretrain_epochs,
            epochs: t.finetune_epochs,
            patience: t.patience,
            val_fraction: t.val_fraction,
            seed: t.seed,
        }
    }
}

/// One layer of overrides; `None` means "leave the lower layer alone".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub arch: Option<Arch>,
    pub attention: Option<bool>,
    pub hidden: Option<usize>,
    pub embed_dim: Option<usize>,
    pub dropout: Option<f64>,
    pub max_len: Option<usize>,
    pub min_count: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub pretrain_iterations: Option<usize>,
    pub tweets_per_class: Option<usize>,
    pub pretrain_epochs: Option<usize>,
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub val_fraction: Option<f64>,
    pub seed: Option<u64>,
}

impl Settings {
    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            };
        }
        take!(arch);
        take!(attention);
        take!(hidden);
        take!(embed_dim);
        take!(dropout);
        take!(max_len);
        take!(min_count);
        take!(batch_size);
        take!(lr);
        take!(pretrain_iterations);
        take!(tweets_per_class);
        take!(pretrain_epochs);
        take!(epochs);
        take!(patience);
        take!(val_fraction);
        take!(seed);
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            learning_rate: self.lr,
            pretrain_iterations: self.pretrain_iterations,
            tweets_per_class: self.tweets_per_class,
            pretrain_epochs: self.pretrain_epochs,
            finetune_epochs: self.epochs,
            patience: self.patience,
            val_fraction: self.val_fraction,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

pub fn parse_on_off(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        other => Err(format!("expected on or off, got {other:?}")),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid value {value:?} for {key}"),
    })
}

/// Parse a flat `key = value` settings file. `#` starts a comment; blank
/// lines are skipped; unknown keys are errors so typos cannot pass silently.
pub fn parse_file(text: &str) -> Result<Overrides> {
    let mut o = Overrides::default();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("expected key = value, got {raw:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "arch" => o.arch = Some(Arch::parse(value)?),
            "attention" => {
                o.attention = Some(parse_on_off(value).map_err(|msg| Error::Parse {
                    line: lineno,
                    msg,
                })?)
            }
            "hidden" => o.hidden = Some(parse_value(key, value, lineno)?),
            "embed-dim" => o.embed_dim = Some(parse_value(key, value, lineno)?),
            "dropout" => o.dropout = Some(parse_value(key, value, lineno)?),
            "max-len" => o.max_len = Some(parse_value(key, value, lineno)?),
            "min-count" => o.min_count = Some(parse_value(key, value, lineno)?),
            "batch-size" => o.batch_size = Some(parse_value(key, value, lineno)?),
            "lr" => o.lr = Some(parse_value(key, value, lineno)?),
            "pretrain-iterations" => {
                o.pretrain_iterations = Some(parse_value(key, value, lineno)?)
            }
            "tweets-per-class" => o.tweets_per_class = Some(parse_value(key, value, lineno)?),
            "pretrain-epochs" => o.pretrain_epochs = Some(parse_value(key, value, lineno)?),
            "epochs" => o.epochs = Some(parse_value(key, value, lineno)?),
            "patience" => o.patience = Some(parse_value(key, value, lineno)?),
            "val-fraction" => o.val_fraction = Some(parse_value(key, value, lineno)?),
            "seed" => o.seed = Some(parse_value(key, value, lineno)?),
            other => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unknown setting {other:?}"),
                })
            }
        }
    }
    Ok(o)
}

pub fn load_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_file(&text)
}

/// Default seed: the environment override when set, otherwise 42.
pub fn env_seed() -> Result<u64> {
    match std::env::var("STRESSDET_SEED") {
        Ok(v) => v.parse().map_err(|_| {
            Error::Config(format!(
                "STRESSDET_SEED must be an unsigned integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(42),
    }
}
