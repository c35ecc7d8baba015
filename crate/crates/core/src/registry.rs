//! Predictor construction by stable string name, with dotted config keys.

use std::sync::Arc;

use crate::cognitive::{
    BllAcPredictor, BllParams, BllPredictor, GirpParams, GirpPredictor, MpPredictor,
    RecencyPredictor, SemconPredictor,
};
use crate::error::{Error, Result};
use crate::folkrank::{EdgeWeighting, FolkRankParams, FolkRankPredictor};
use crate::folksonomy::Folksonomy;
use crate::pitf::{PitfPredictor, TrainConfig};
use crate::predictor::TagPredictor;

/// Every predictor reachable by name.
pub const PREDICTOR_NAMES: [&str; 8] = [
    "mp", "recency", "semcon", "girp", "bll", "bllac", "folkrank", "pitf",
];

/// All tunable predictor parameters, addressable by dotted keys
/// (`bll.d`, `bllac.beta`, `girp.lambda`, `folkrank.d`, `folkrank.tol`,
/// `folkrank.max_iter`, `folkrank.binary`, `pitf.k`, `pitf.alpha`,
/// `pitf.gamma`, `pitf.epochs`, `pitf.negatives`).
#[derive(Debug, Clone)]
pub struct PredictorParams {
    pub bll: BllParams,
    pub girp: GirpParams,
    pub folkrank: FolkRankParams,
    pub pitf_k: usize,
    pub pitf: TrainConfig,
}

impl Default for PredictorParams {
    fn default() -> Self {
        PredictorParams {
            bll: BllParams::default(),
            girp: GirpParams::default(),
            folkrank: FolkRankParams::default(),
            pitf_k: 64,
            pitf: TrainConfig::default(),
        }
    }
}

impl PredictorParams {
    /// Applies one dotted key. The seed for stochastic components is set
    /// separately via [`PredictorParams::with_seed`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidParam(format!("{key}: invalid {what} `{value}`"));
        match key {
            "bll.d" => self.bll.d = value.parse().map_err(|_| bad("float"))?,
            "bllac.beta" => self.bll.beta = value.parse().map_err(|_| bad("float"))?,
            "girp.lambda" => self.girp.lambda = value.parse().map_err(|_| bad("float"))?,
            "folkrank.d" => self.folkrank.damping = value.parse().map_err(|_| bad("float"))?,
            "folkrank.tol" => self.folkrank.tol = value.parse().map_err(|_| bad("float"))?,
            "folkrank.max_iter" => {
                self.folkrank.max_iter = value.parse().map_err(|_| bad("integer"))?
            }
            "folkrank.binary" => {
                self.folkrank.weighting = match value {
                    "true" | "1" => EdgeWeighting::Binary,
                    "false" | "0" => EdgeWeighting::Counts,
                    _ => return Err(bad("boolean")),
                }
            }
            "pitf.k" => self.pitf_k = value.parse().map_err(|_| bad("integer"))?,
            "pitf.alpha" => self.pitf.learn_rate = value.parse().map_err(|_| bad("float"))?,
            "pitf.gamma" => {
                self.pitf.regularization = value.parse().map_err(|_| bad("float"))?
            }
            "pitf.epochs" => self.pitf.epochs = value.parse().map_err(|_| bad("integer"))?,
            "pitf.negatives" => {
                self.pitf.negatives = value.parse().map_err(|_| bad("integer"))?
            }
            _ => {
                return Err(Error::InvalidParam(format!(
                    "unknown predictor parameter `{key}`"
                )))
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.pitf.seed = seed;
        self
    }
}

/// Fits the named predictor on the training folksonomy.
pub fn build_predictor(
    name: &str,
    train: &Arc<Folksonomy>,
    params: &PredictorParams,
) -> Result<Box<dyn TagPredictor>> {
    Ok(match name {
        "mp" => Box::new(MpPredictor::fit(train)),
        "recency" => Box::new(RecencyPredictor::fit(train)),
        "semcon" => Box::new(SemconPredictor::fit(train)),
        "girp" => Box::new(GirpPredictor::fit(train, params.girp)?),
        "bll" => Box::new(BllPredictor::fit(train, params.bll)?),
        "bllac" => Box::new(BllAcPredictor::fit(train, params.bll)?),
        "folkrank" => Box::new(FolkRankPredictor::fit(train, params.folkrank)?),
        "pitf" => Box::new(PitfPredictor::fit(train, params.pitf_k, &params.pitf)?),
        other => return Err(Error::UnknownPredictor(other.to_string())),
    })
}
