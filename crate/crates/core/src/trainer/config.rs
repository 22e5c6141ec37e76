use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::corpus::Granularity;
use crate::error::{Error, Result};
use crate::model::{PriorConfig, Variant, DEFAULT_NEGATIVE_POWER};

/// Starting point of dynamic training.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// Gaussian vectors, identical across slices.
    Random,
    /// Static pretraining on the whole corpus, broadcast to every slice.
    Static,
    /// Embedding directory written by an earlier run.
    File(PathBuf),
}

impl std::fmt::Display for Init {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Init::Random => f.write_str("random"),
            Init::Static => f.write_str("static"),
            Init::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => Init::Random,
            "static" => Init::Static,
            "" => return Err(Error::InvalidArgument("empty init".into())),
            path => Init::File(PathBuf::from(path)),
        })
    }
}

/// Order in which slices are visited within an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceOrder {
    Chronological,
    /// A fresh permutation every epoch.
    Shuffled,
}

impl std::fmt::Display for SliceOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SliceOrder::Chronological => "chronological",
            SliceOrder::Shuffled => "shuffled",
        })
    }
}

impl FromStr for SliceOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chronological" => Ok(SliceOrder::Chronological),
            "shuffled" => Ok(SliceOrder::Shuffled),
            other => Err(Error::InvalidArgument(format!("unknown slice order {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub prior: PriorConfig,
    /// Context half-width `C`.
    pub window: usize,
    pub dim: usize,
    /// Negatives per positive example.
    pub negatives: usize,
    /// Exponent applied to unigram frequencies for negative sampling.
    pub negative_power: f64,
    pub minibatches_per_slice: usize,
    pub batch_size: usize,
    /// Adagrad base rate.
    pub learning_rate: f64,
    /// Initial value of every Adagrad accumulator.
    pub initial_accumulator: f64,
    /// Rescale each batch gradient to at most this global norm.
    pub clip_norm: Option<f64>,
    pub static_epochs: usize,
    pub epochs: usize,
    pub seed: u64,
    pub init: Init,
    /// Standard deviation of random initial vectors.
    pub init_scale: f64,
    pub order: SliceOrder,
    /// Evaluate the validation split after every epoch.
    pub validate: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            prior: PriorConfig::with_default_lambda0(Variant::Dbe, 1.0),
            window: 4,
            dim: 100,
            negatives: 10,
            negative_power: DEFAULT_NEGATIVE_POWER,
            minibatches_per_slice: Granularity::Annual.default_minibatches(),
            batch_size: 512,
            learning_rate: 0.1,
            initial_accumulator: 0.1,
            clip_norm: Some(25.0),
            static_epochs: 5,
            epochs: 5,
            seed: 0,
            init: Init::Static,
            init_scale: 0.1,
            order: SliceOrder::Chronological,
            validate: true,
        }
    }
}

const KEYS: [&str; 20] = [
    "variant",
    "lambda",
    "lambda0",
    "window",
    "dim",
    "negatives",
    "negative_power",
    "minibatches_per_slice",
    "batch_size",
    "learning_rate",
    "initial_accumulator",
    "clip_norm",
    "static_epochs",
    "epochs",
    "seed",
    "init",
    "init_scale",
    "order",
    "validate",
    "unit_time_weights",
];

impl TrainingConfig {
    /// Defaults with the minibatch count matched to `granularity`.
    pub fn for_granularity(granularity: Granularity) -> Self {
        TrainingConfig {
            minibatches_per_slice: granularity.default_minibatches(),
            ..TrainingConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        for (name, n) in [
            ("window", self.window),
            ("dim", self.dim),
            ("negatives", self.negatives),
            ("batch_size", self.batch_size),
        ] {
            if n == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if !(self.initial_accumulator >= 0.0 && self.initial_accumulator.is_finite()) {
            return Err(Error::InvalidArgument("initial_accumulator must be non-negative".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidArgument("init_scale must be non-negative".into()));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument("clip_norm must be positive".into()));
            }
        }
        Ok(())
    }

    /// `key = value` lines, one per field.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let clip = self.clip_norm.map_or("none".to_string(), |c| c.to_string());
        let values: [String; 20] = [
            self.prior.variant.to_string(),
            self.prior.lambda.to_string(),
            self.prior.lambda0.to_string(),
            self.window.to_string(),
            self.dim.to_string(),
            self.negatives.to_string(),
            self.negative_power.to_string(),
            self.minibatches_per_slice.to_string(),
            self.batch_size.to_string(),
            self.learning_rate.to_string(),
            self.initial_accumulator.to_string(),
            clip,
            self.static_epochs.to_string(),
            self.epochs.to_string(),
            self.seed.to_string(),
            self.init.to_string(),
            self.init_scale.to_string(),
            self.order.to_string(),
            self.validate.to_string(),
            self.prior.unit_time_weights.to_string(),
        ];
        for (k, v) in KEYS.iter().zip(values) {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// Parse `key = value` lines on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = TrainingConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// Apply `key = value` lines to this configuration. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key = value", i + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::InvalidArgument(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Set one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
        }
        match key {
            "variant" => self.prior.variant = value.parse()?,
            "lambda" => self.prior.lambda = num(key, value)?,
            "lambda0" => self.prior.lambda0 = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "dim" => self.dim = num(key, value)?,
            "negatives" => self.negatives = num(key, value)?,
            "negative_power" => self.negative_power = num(key, value)?,
            "minibatches_per_slice" => self.minibatches_per_slice = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "initial_accumulator" => self.initial_accumulator = num(key, value)?,
            "clip_norm" => {
                self.clip_norm = match value {
                    "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "static_epochs" => self.static_epochs = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "init" => self.init = value.parse()?,
            "init_scale" => self.init_scale = num(key, value)?,
            "order" => self.order = value.parse()?,
            "validate" => self.validate = num(key, value)?,
            "unit_time_weights" => self.prior.unit_time_weights = num(key, value)?,
            other => return Err(Error::InvalidArgument(format!("unknown key {other}"))),
        }
        Ok(())
    }
}
