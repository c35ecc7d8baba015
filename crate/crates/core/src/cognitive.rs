//! Frequency, recency and semantic-context predictors, plus the combined
//! models GIRP, BLL and BLL_AC.
//!
//! BLL scores a tag by the log of a power-law-decayed sum over the times the
//! user assigned it: B(i) = ln(sum_j dt_j^(-d)) with dt in seconds, clamped
//! to >= 1. GIRP is the exponential-decay analogue with dt in days. BLL_AC
//! mixes a normalized BLL with a normalized co-occurrence context score.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cooc::{build_cooccurrence, CoocMatrix};
use crate::error::{Error, Result};
use crate::folksonomy::{Folksonomy, SECONDS_PER_DAY};
use crate::ids::{ResourceId, TagId, UserId};
use crate::predictor::{TagPredictor, TagScores};

/// Keeps the logarithm finite when an exponential-decay sum underflows.
const LOG_FLOOR: f64 = 1e-12;

/// Parameters of the base-level component and its context mixing.
#[derive(Debug, Clone, Copy)]
pub struct BllParams {
    /// Power-law decay exponent, d >= 0.
    pub d: f64,
    /// Context mixing weight in [0, 1]; only BLL_AC uses it.
    pub beta: f64,
}

impl Default for BllParams {
    fn default() -> Self {
        BllParams { d: 0.5, beta: 0.5 }
    }
}

impl BllParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParam(format!("bll.d must be >= 0, got {}", self.d)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParam(format!(
                "bllac.beta must be in [0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Exponential decay rate per day for GIRP, lambda > 0.
#[derive(Debug, Clone, Copy)]
pub struct GirpParams {
    pub lambda: f64,
}

impl Default for GirpParams {
    fn default() -> Self {
        GirpParams { lambda: 0.1 }
    }
}

impl GirpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "girp.lambda must be > 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Per-user tag usage timestamps from the training set, ascending per tag.
/// Shared fitted state of the frequency/recency family.
#[derive(Debug, Clone, Default)]
struct UsageHistory {
    per_user: Vec<BTreeMap<TagId, Vec<i64>>>,
}

impl UsageHistory {
    fn build(train: &Folksonomy) -> UsageHistory {
        let mut per_user: Vec<BTreeMap<TagId, Vec<i64>>> =
            vec![BTreeMap::new(); train.vocab().users.len()];
        for user in train.users_with_posts() {
            let history = &mut per_user[user.0 as usize];
            for &i in train.user_post_indices(user) {
                let post = &train.posts()[i];
                for &t in post.tags() {
                    history.entry(t).or_default().push(post.timestamp);
                }
            }
        }
        UsageHistory { per_user }
    }

    fn of(&self, user: UserId) -> Option<&BTreeMap<TagId, Vec<i64>>> {
        self.per_user
            .get(user.0 as usize)
            .filter(|m| !m.is_empty())
    }
}

fn delta_seconds(t_ref: i64, used_at: i64) -> f64 {
    (t_ref - used_at).max(1) as f64
}

/// ln(sum_j dt_j^(-d)) over a tag's usage times, dt clamped to >= 1 second.
fn bll_activation_of(timestamps: &[i64], t_ref: i64, d: f64) -> f64 {
    let sum: f64 = timestamps
        .iter()
        .map(|&t| delta_seconds(t_ref, t).powf(-d))
        .sum();
    sum.ln()
}

/// ln(sum_j exp(-lambda * dt_days_j) + floor), dt in real days.
fn girp_activation_of(timestamps: &[i64], t_ref: i64, lambda: f64) -> f64 {
    let sum: f64 = timestamps
        .iter()
        .map(|&t| (-lambda * delta_seconds(t_ref, t) / SECONDS_PER_DAY as f64).exp())
        .sum();
    (sum + LOG_FLOOR).ln()
}

/// Most Popular Tags of the user: pure frequency ranking.
pub struct MpPredictor {
    history: UsageHistory,
}

impl MpPredictor {
    pub fn fit(train: &Folksonomy) -> MpPredictor {
        MpPredictor {
            history: UsageHistory::build(train),
        }
    }

    pub fn user_scores(&self, user: UserId) -> TagScores {
        self.history
            .of(user)
            .map(|tags| {
                tags.iter()
                    .map(|(&t, times)| (t, times.len() as f64))
                    .collect()
            })
            .unwrap_or_default()
    }
}

impl TagPredictor for MpPredictor {
    fn name(&self) -> &str {
        "mp"
    }

    fn score(&self, user: UserId, _resource: ResourceId, _t_ref: i64) -> TagScores {
        self.user_scores(user)
    }
}

/// Ranks a user's tags by the timestamp of their last usage.
pub struct RecencyPredictor {
    history: UsageHistory,
}

impl RecencyPredictor {
    pub fn fit(train: &Folksonomy) -> RecencyPredictor {
        RecencyPredictor {
            history: UsageHistory::build(train),
        }
    }

    pub fn user_scores(&self, user: UserId) -> TagScores {
        self.history
            .of(user)
            .map(|tags| {
                tags.iter()
                    .map(|(&t, times)| (t, *times.last().unwrap() as f64))
                    .collect()
            })
            .unwrap_or_default()
    }
}

impl TagPredictor for RecencyPredictor {
    fn name(&self) -> &str {
        "recency"
    }

    fn score(&self, user: UserId, _resource: ResourceId, _t_ref: i64) -> TagScores {
        self.user_scores(user)
    }
}

/// Ranks tags by their co-occurrence with the tags other users already
/// assigned to the queried resource.
pub struct SemconPredictor {
    train: Arc<Folksonomy>,
    cooc: CoocMatrix,
}

impl SemconPredictor {
    pub fn fit(train: &Arc<Folksonomy>) -> SemconPredictor {
        SemconPredictor {
            train: Arc::clone(train),
            cooc: build_cooccurrence(train),
        }
    }

    pub fn with_cooc(train: &Arc<Folksonomy>, cooc: CoocMatrix) -> SemconPredictor {
        SemconPredictor {
            train: Arc::clone(train),
            cooc,
        }
    }

    /// score(i) = sum over context tags c of multiplicity(c) * cooc(c, i).
    pub fn context_scores(&self, user: UserId, resource: ResourceId) -> TagScores {
        let context = self.train.resource_context(resource, user);
        let mut scores = TagScores::new();
        for (&c, &mult) in &context {
            for &(i, n) in self.cooc.row(c) {
                *scores.entry(i).or_insert(0.0) += mult as f64 * n as f64;
            }
        }
        scores
    }
}

impl TagPredictor for SemconPredictor {
    fn name(&self) -> &str {
        "semcon"
    }

    fn score(&self, user: UserId, resource: ResourceId, _t_ref: i64) -> TagScores {
        self.context_scores(user, resource)
    }
}

/// Base-level learning: frequency and recency through power-law decay.
pub struct BllPredictor {
    history: UsageHistory,
    d: f64,
}

impl BllPredictor {
    pub fn fit(train: &Folksonomy, params: BllParams) -> Result<BllPredictor> {
        params.validate()?;
        Ok(BllPredictor {
            history: UsageHistory::build(train),
            d: params.d,
        })
    }

    pub fn activations(&self, user: UserId, t_ref: i64) -> TagScores {
        self.history
            .of(user)
            .map(|tags| {
                tags.iter()
                    .map(|(&t, times)| (t, bll_activation_of(times, t_ref, self.d)))
                    .collect()
            })
            .unwrap_or_default()
    }
}

impl TagPredictor for BllPredictor {
    fn name(&self) -> &str {
        "bll"
    }

    fn score(&self, user: UserId, _resource: ResourceId, t_ref: i64) -> TagScores {
        self.activations(user, t_ref)
    }
}

/// Frequency and recency through exponential decay.
pub struct GirpPredictor {
    history: UsageHistory,
    lambda: f64,
}

impl GirpPredictor {
    pub fn fit(train: &Folksonomy, params: GirpParams) -> Result<GirpPredictor> {
        params.validate()?;
        Ok(GirpPredictor {
            history: UsageHistory::build(train),
            lambda: params.lambda,
        })
    }

    pub fn activations(&self, user: UserId, t_ref: i64) -> TagScores {
        self.history
            .of(user)
            .map(|tags| {
                tags.iter()
                    .map(|(&t, times)| (t, girp_activation_of(times, t_ref, self.lambda)))
                    .collect()
            })
            .unwrap_or_default()
    }
}

impl TagPredictor for GirpPredictor {
    fn name(&self) -> &str {
        "girp"
    }

    fn score(&self, user: UserId, _resource: ResourceId, t_ref: i64) -> TagScores {
        self.activations(user, t_ref)
    }
}

/// Min-max normalization onto [0, 1] over the map's support. Monotone, so
/// rankings survive. A single-valued support maps to 1.0; empty stays empty.
pub fn normalize_scores(scores: &TagScores) -> TagScores {
    if scores.is_empty() {
        return TagScores::new();
    }
    let min = scores.values().cloned().fold(f64::INFINITY, f64::min);
    let max = scores.values().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return scores.keys().map(|&t| (t, 1.0)).collect();
    }
    let span = max - min;
    scores.iter().map(|(&t, &v)| (t, (v - min) / span)).collect()
}

/// The full activation model: beta * norm(BLL) + (1 - beta) * norm(SemCon),
/// summed over the union of supports; a tag absent from one component
/// contributes zero to that term.
pub struct BllAcPredictor {
    bll: BllPredictor,
    semcon: SemconPredictor,
    beta: f64,
}

impl BllAcPredictor {
    pub fn fit(train: &Arc<Folksonomy>, params: BllParams) -> Result<BllAcPredictor> {
        params.validate()?;
        Ok(BllAcPredictor {
            bll: BllPredictor::fit(train, params)?,
            semcon: SemconPredictor::fit(train),
            beta: params.beta,
        })
    }

    pub fn combined(&self, user: UserId, resource: ResourceId, t_ref: i64) -> TagScores {
        let mut scores = TagScores::new();
        // A component with zero weight vanishes entirely, support included,
        // so the beta endpoints reproduce the lone component exactly.
        if self.beta > 0.0 {
            let base = normalize_scores(&self.bll.activations(user, t_ref));
            for (&t, &v) in &base {
                *scores.entry(t).or_insert(0.0) += self.beta * v;
            }
        }
        if self.beta < 1.0 {
            let context = normalize_scores(&self.semcon.context_scores(user, resource));
            for (&t, &v) in &context {
                *scores.entry(t).or_insert(0.0) += (1.0 - self.beta) * v;
            }
        }
        scores
    }
}

impl TagPredictor for BllAcPredictor {
    fn name(&self) -> &str {
        "bllac"
    }

    fn score(&self, user: UserId, resource: ResourceId, t_ref: i64) -> TagScores {
        self.combined(user, resource, t_ref)
    }
}
