//! The prediction interface shared by every algorithm.

use std::collections::BTreeMap;

use crate::ids::{ResourceId, TagId, UserId};

/// Score map over tags. Tags with no evidence are absent (implicitly -inf).
/// A BTreeMap keeps summation and iteration order deterministic.
pub type TagScores = BTreeMap<TagId, f64>;

/// A fitted tag prediction model. Fitting happens at construction; `score`
/// is a pure function of the fitted state and the query, safe to call
/// concurrently.
pub trait TagPredictor: Send + Sync {
    fn name(&self) -> &str;

    /// Scores candidate tags for user `user` tagging `resource` at reference
    /// time `t_ref` (seconds). All returned scores are finite.
    fn score(&self, user: UserId, resource: ResourceId, t_ref: i64) -> TagScores;
}

/// Ranked tag predictions, strictly ordered by (score desc, tag id asc).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTagList {
    entries: Vec<(TagId, f64)>,
}

impl ScoredTagList {
    pub fn entries(&self) -> &[(TagId, f64)] {
        &self.entries
    }

    pub fn tags(&self) -> impl Iterator<Item = TagId> + '_ {
        self.entries.iter().map(|&(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The k highest-scored tags under the deterministic total order
/// (score desc, tag id asc). Returns fewer than k when the support is
/// smaller; never pads.
pub fn top_k(scores: &TagScores, k: usize) -> ScoredTagList {
    let mut entries: Vec<(TagId, f64)> = scores
        .iter()
        .map(|(&t, &s)| {
            debug_assert!(s.is_finite(), "non-finite score for {t:?}");
            (t, s)
        })
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(k);
    ScoredTagList { entries }
}
