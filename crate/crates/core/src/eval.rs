//! Chronological evaluation protocol and accuracy metrics.
//!
//! Every test post is one query: the predictor, fitted on the training set
//! only, scores tags for (user, resource) at the test post's timestamp, and
//! the top-ranked tags are compared with the post's actual tag set.
//! Metrics are macro-averaged over queries.

use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ids::TagId;
use crate::predictor::{top_k, ScoredTagList, TagPredictor};
use crate::registry::{build_predictor, PredictorParams};
use crate::split::ChronoSplit;

pub const EVAL_FORMAT_VERSION: u32 = 1;

/// Denominator used for precision@k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecisionDenominator {
    /// Always k; predictors returning fewer than k tags are penalized.
    #[default]
    FixedK,
    /// The returned list length (sensitivity-check variant).
    Returned,
}

/// Evaluation configuration.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Cutoffs for the generic precision/recall metrics.
    pub ks: Vec<usize>,
    pub precision_denominator: PrecisionDenominator,
    /// Keep per-query records in the report.
    pub retain_queries: bool,
    /// Worker threads for query fan-out; 1 = sequential. Results are
    /// identical for any value: per-query metrics are reduced in query
    /// order.
    pub threads: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            ks: vec![5, 10],
            precision_denominator: PrecisionDenominator::FixedK,
            retain_queries: false,
            threads: 1,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() {
            return Err(Error::InvalidParam("ks must not be empty".into()));
        }
        if self.ks.iter().any(|k| !(1..=100).contains(k)) {
            return Err(Error::InvalidParam("every k must be in 1..=100".into()));
        }
        if self.threads < 1 {
            return Err(Error::InvalidParam("threads must be >= 1".into()));
        }
        Ok(())
    }
}

/// Precision and recall of the top-min(k, len) predictions. Precision
/// divides by k (or the returned length, per `denom`); recall divides by
/// |relevant|.
pub fn precision_recall_at_k(
    predicted: &ScoredTagList,
    relevant: &BTreeSet<TagId>,
    k: usize,
    denom: PrecisionDenominator,
) -> Result<(f64, f64)> {
    if relevant.is_empty() {
        return Err(Error::InvalidParam("empty relevant set".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let taken = k.min(predicted.len());
    let hits = predicted
        .tags()
        .take(taken)
        .filter(|t| relevant.contains(t))
        .count() as f64;
    let divisor = match denom {
        PrecisionDenominator::FixedK => k as f64,
        PrecisionDenominator::Returned => taken.max(1) as f64,
    };
    let precision = if taken == 0 { 0.0 } else { hits / divisor };
    let recall = hits / relevant.len() as f64;
    Ok((precision, recall))
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&precision) && (0.0..=1.0).contains(&recall));
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Binary-relevance nDCG: DCG over the top-min(k, len) positions divided by
/// the ideal DCG of min(k, |relevant|) relevant items.
pub fn ndcg_at_k(predicted: &ScoredTagList, relevant: &BTreeSet<TagId>, k: usize) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::InvalidParam("empty relevant set".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let dcg: f64 = predicted
        .tags()
        .take(k)
        .enumerate()
        .filter(|(_, t)| relevant.contains(t))
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum();
    let ideal: f64 = (0..k.min(relevant.len()))
        .map(|i| 1.0 / ((i + 2) as f64).log2())
        .sum();
    Ok(dcg / ideal)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricValue {
    pub metric: String,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct QueryRecord {
    pub user: String,
    pub resource: String,
    pub predicted: Vec<String>,
    pub relevant: Vec<String>,
}

/// Macro-averaged evaluation result for one predictor.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvalReport {
    pub format_version: u32,
    pub predictor: String,
    pub queries: usize,
    pub split_hash: String,
    pub metrics: Vec<MetricValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_query: Option<Vec<QueryRecord>>,
}

impl EvalReport {
    pub fn metric(&self, metric: &str, k: usize) -> Option<f64> {
        self.metrics
            .iter()
            .find(|m| m.metric == metric && m.k == k)
            .map(|m| m.value)
    }

    /// Long-form CSV: `predictor,metric,k,value,queries`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "predictor,metric,k,value,queries")?;
        for m in &self.metrics {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.predictor, m.metric, m.k, m.value, self.queries
            )?;
        }
        Ok(())
    }
}

/// Builds the named predictor on the split's training set and evaluates it.
pub fn run_protocol(
    name: &str,
    split: &ChronoSplit,
    params: &PredictorParams,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let predictor = build_predictor(name, &split.train, params)?;
    run_with(predictor.as_ref(), split, cfg)
}

/// Evaluates an already-fitted predictor over every test query.
pub fn run_with(
    predictor: &dyn TagPredictor,
    split: &ChronoSplit,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    if split.test.is_empty() {
        return Err(Error::InsufficientData(
            "no test queries (every user has a single post)".into(),
        ));
    }

    // Metric layout: p@k and r@k for each configured k, then f1@5, ndcg@10.
    let ks = &cfg.ks;
    let k_max = ks.iter().copied().max().unwrap().max(10).max(5);
    let columns = 2 * ks.len() + 2;

    let evaluate_query = |post: &crate::folksonomy::Post| -> (Vec<f64>, Option<QueryRecord>) {
        let scores = predictor.score(post.user, post.resource, post.timestamp);
        let ranked = top_k(&scores, k_max);
        let relevant: BTreeSet<TagId> = post.tags().iter().copied().collect();
        let mut row = Vec::with_capacity(columns);
        for &k in ks {
            let (p, r) =
                precision_recall_at_k(&ranked, &relevant, k, cfg.precision_denominator)
                    .expect("relevant non-empty by post invariant");
            row.push(p);
            row.push(r);
        }
        let (p5, r5) =
            precision_recall_at_k(&ranked, &relevant, 5, cfg.precision_denominator).unwrap();
        row.push(f1_score(p5, r5));
        row.push(ndcg_at_k(&ranked, &relevant, 10).unwrap());
        let record = cfg.retain_queries.then(|| {
            let vocab = split.train.vocab();
            QueryRecord {
                user: vocab.users.name(post.user.0).to_string(),
                resource: vocab.resources.name(post.resource.0).to_string(),
                predicted: ranked
                    .tags()
                    .map(|t| vocab.tags.name(t.0).to_string())
                    .collect(),
                relevant: relevant
                    .iter()
                    .map(|t| vocab.tags.name(t.0).to_string())
                    .collect(),
            }
        });
        (row, record)
    };

    let per_query: Vec<(Vec<f64>, Option<QueryRecord>)> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            split.test.par_iter().map(evaluate_query).collect()
        })
    } else {
        split.test.iter().map(evaluate_query).collect()
    };

    // Reduce in query order so results do not depend on the thread count.
    let queries = per_query.len();
    let mut sums = vec![0.0; columns];
    let mut records = cfg.retain_queries.then(Vec::new);
    for (row, record) in per_query {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
        if let (Some(records), Some(record)) = (&mut records, record) {
            records.push(record);
        }
    }
    let mut metrics = Vec::with_capacity(columns);
    let mut col = 0;
    for &k in ks {
        metrics.push(MetricValue {
            metric: "precision".into(),
            k,
            value: sums[col] / queries as f64,
        });
        metrics.push(MetricValue {
            metric: "recall".into(),
            k,
            value: sums[col + 1] / queries as f64,
        });
        col += 2;
    }
    metrics.push(MetricValue {
        metric: "f1".into(),
        k: 5,
        value: sums[col] / queries as f64,
    });
    metrics.push(MetricValue {
        metric: "ndcg".into(),
        k: 10,
        value: sums[col + 1] / queries as f64,
    });

    Ok(EvalReport {
        format_version: EVAL_FORMAT_VERSION,
        predictor: predictor.name().to_string(),
        queries,
        split_hash: split.split_hash(),
        metrics,
        per_query: records,
    })
}
