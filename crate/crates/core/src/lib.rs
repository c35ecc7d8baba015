//! Tag-reuse analysis and prediction over folksonomy datasets.
//!
//! The crate models social-tagging datasets (posts of users annotating
//! resources with tags), splits them chronologically per user, and provides
//! two study tracks over the split:
//!
//! - an empirical track pooling tag-reuse probability by usage frequency,
//!   recency and semantic context, with power-law fits of the pooled
//!   curves ([`reuse`]);
//! - a prediction track evaluating tag predictors (frequency, recency and
//!   context baselines, the activation models BLL/BLL_AC and GIRP, the
//!   graph ranker FolkRank, and PITF) under F1@5 and nDCG@10 ([`eval`]).
//!
//! A seeded synthetic generator ([`synth`]) provides reproducible datasets
//! with controllable narrowness, temporal drift and context strength.

pub mod cognitive;
pub mod cooc;
pub mod error;
pub mod eval;
pub mod folkrank;
pub mod folksonomy;
pub mod ids;
pub mod pitf;
pub mod predictor;
pub mod registry;
pub mod reuse;
pub mod split;
pub mod synth;

pub use error::{Error, Result};
pub use folksonomy::{
    parse_posts, Folksonomy, NarrownessClass, NarrownessReport, Post, PostRecord,
};
pub use ids::{ResourceId, TagId, UserId, Vocab, Vocabularies};
pub use predictor::{top_k, ScoredTagList, TagPredictor, TagScores};
pub use split::{chronological_split, ChronoSplit};
