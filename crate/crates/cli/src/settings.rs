//! Run configuration: defaults, config-file keys and flag overrides.
//!
//! The config file is a flat key = value format, one pair per line, `#`
//! comments allowed. Flags win over file values, which win over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use tagreuse::registry::PredictorParams;
use tagreuse::reuse::Weighting;
use tagreuse::synth::SynthParams;
use tagreuse::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorChoice {
    Frequency,
    Recency,
    Context,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinChoice {
    Raw,
    Log2,
}

/// Everything a command run needs, merged from defaults, config file and
/// flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub predictors: Vec<String>,
    pub ks: Vec<usize>,
    pub factor: FactorChoice,
    pub min_support: u64,
    pub bin: BinChoice,
    pub weighting: Weighting,
    pub precision_denom_returned: bool,
    pub params: PredictorParams,
    pub synth: SynthParams,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            dataset: None,
            out: None,
            seed: None,
            threads: 1,
            predictors: vec![
                "mp".into(),
                "recency".into(),
                "semcon".into(),
                "girp".into(),
                "bll".into(),
                "bllac".into(),
            ],
            ks: vec![5, 10],
            factor: FactorChoice::All,
            min_support: 1,
            bin: BinChoice::Raw,
            weighting: Weighting::Uniform,
            precision_denom_returned: false,
            params: PredictorParams::default(),
            synth: SynthParams::default(),
        }
    }
}

impl Settings {
    pub fn load_config_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParam(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Routes one key to its setting. Predictor keys (dotted) fall through
    /// to [`PredictorParams::set`]; synth keys carry a `synth.` prefix.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidParam(format!("{key}: invalid {what} `{value}`"));
        match key {
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => self.seed = Some(value.parse().map_err(|_| bad("integer"))?),
            "threads" => self.threads = value.parse().map_err(|_| bad("integer"))?,
            "predictors" => {
                self.predictors = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "ks" => {
                self.ks = value
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| bad("integer list")))
                    .collect::<Result<_>>()?
            }
            "factor" => self.factor = parse_factor(value)?,
            "min_support" => self.min_support = value.parse().map_err(|_| bad("integer"))?,
            "bin" => self.bin = parse_bin(value)?,
            "weighted" => {
                self.weighting = if parse_bool(key, value)? {
                    Weighting::BySupport
                } else {
                    Weighting::Uniform
                }
            }
            "precision_denom_returned" => {
                self.precision_denom_returned = parse_bool(key, value)?
            }
            "synth.users" => self.synth.users = value.parse().map_err(|_| bad("integer"))?,
            "synth.posts_per_user" => {
                self.synth.posts_per_user = value.parse().map_err(|_| bad("integer"))?
            }
            "synth.vocab" => {
                self.synth.vocab_size = value.parse().map_err(|_| bad("integer"))?
            }
            "synth.tags_per_post" => {
                self.synth.tags_per_post = value.parse().map_err(|_| bad("integer"))?
            }
            "synth.d_gen" => {
                self.synth.reuse_decay = value.parse().map_err(|_| bad("float"))?
            }
            "synth.context_strength" => {
                self.synth.context_strength = value.parse().map_err(|_| bad("float"))?
            }
            "synth.sharing" => {
                self.synth.resource_sharing = value.parse().map_err(|_| bad("float"))?
            }
            "synth.shared_resources" => {
                self.synth.shared_resources = value.parse().map_err(|_| bad("integer"))?
            }
            "synth.fresh_weight" => {
                self.synth.fresh_weight = value.parse().map_err(|_| bad("float"))?
            }
            "synth.drift" => self.synth.drift = value.parse().map_err(|_| bad("float"))?,
            dotted => self.params.set(dotted, value)?,
        }
        Ok(())
    }

    /// Key=value pairs from repeated `--set` flags.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> Result<()> {
        for pair in pairs {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidParam(format!("--set expects key=value, got `{pair}`"))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate_predictor_names(&self) -> Result<()> {
        for name in &self.predictors {
            if !tagreuse::registry::PREDICTOR_NAMES.contains(&name.as_str()) {
                return Err(Error::UnknownPredictor(name.clone()));
            }
        }
        if self.predictors.is_empty() {
            return Err(Error::InvalidParam("empty predictor list".into()));
        }
        Ok(())
    }

    /// Stochastic components need an explicit seed.
    pub fn require_seed_if_stochastic(&self) -> Result<u64> {
        if self.predictors.iter().any(|p| p == "pitf") && self.seed.is_none() {
            return Err(Error::InvalidParam(
                "--seed is required when the predictor list contains pitf".into(),
            ));
        }
        Ok(self.seed.unwrap_or(0))
    }
}

pub fn parse_factor(value: &str) -> Result<FactorChoice> {
    match value {
        "frequency" => Ok(FactorChoice::Frequency),
        "recency" => Ok(FactorChoice::Recency),
        "context" => Ok(FactorChoice::Context),
        "all" => Ok(FactorChoice::All),
        _ => Err(Error::InvalidParam(format!(
            "factor must be frequency|recency|context|all, got `{value}`"
        ))),
    }
}

pub fn parse_bin(value: &str) -> Result<BinChoice> {
    match value {
        "raw" => Ok(BinChoice::Raw),
        "log2" => Ok(BinChoice::Log2),
        _ => Err(Error::InvalidParam(format!(
            "bin must be raw|log2, got `{value}`"
        ))),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::InvalidParam(format!(
            "{key}: expected boolean, got `{value}`"
        ))),
    }
}
