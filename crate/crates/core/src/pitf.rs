//! Pairwise Interaction Tensor Factorization trained with pairwise ranking.
//!
//! ŷ(u, r, t) = <user_u, tag_user_t> + <resource_r, tag_resource_t>.
//! Training maximizes ln σ(ŷ(u,r,t+) − ŷ(u,r,t−)) with L2 regularization,
//! one SGD step per sampled (positive, negative) tag pair. Everything is
//! deterministic per seed.

use std::io::{Read, Write};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::folksonomy::Folksonomy;
use crate::ids::{ResourceId, TagId, UserId};
use crate::predictor::{TagPredictor, TagScores};

const CHECKPOINT_MAGIC: &[u8; 4] = b"PITF";
const CHECKPOINT_VERSION: u32 = 1;

/// Factor tables of the model, row-major, one row of `k` factors per entity.
#[derive(Debug, Clone, PartialEq)]
pub struct PitfModel {
    k: usize,
    n_users: usize,
    n_resources: usize,
    n_tags: usize,
    seed: u64,
    user_factors: Vec<f64>,
    resource_factors: Vec<f64>,
    tag_user_factors: Vec<f64>,
    tag_resource_factors: Vec<f64>,
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learn_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    /// Negative samples per positive incidence.
    pub negatives: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learn_rate: 0.05,
            regularization: 5e-5,
            epochs: 100,
            negatives: 1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learn_rate.is_nan() || self.learn_rate <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "pitf.alpha must be > 0, got {}",
                self.learn_rate
            )));
        }
        if self.regularization < 0.0 {
            return Err(Error::InvalidParam(format!(
                "pitf.gamma must be >= 0, got {}",
                self.regularization
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidParam("pitf.epochs must be >= 1".into()));
        }
        if self.negatives < 1 {
            return Err(Error::InvalidParam("pitf.negatives must be >= 1".into()));
        }
        Ok(())
    }
}

/// Draws all factor entries i.i.d. normal(0, 0.01) from the seeded stream.
pub fn init_model(
    n_users: usize,
    n_resources: usize,
    n_tags: usize,
    k: usize,
    seed: u64,
) -> Result<PitfModel> {
    if k < 1 {
        return Err(Error::InvalidParam("pitf.k must be >= 1".into()));
    }
    if n_users < 1 || n_resources < 1 || n_tags < 1 {
        return Err(Error::InvalidParam(
            "model dimensions must all be >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.01).expect("valid std dev");
    let mut draw = |len: usize| -> Vec<f64> {
        (0..len).map(|_| normal.sample(&mut rng)).collect()
    };
    Ok(PitfModel {
        k,
        n_users,
        n_resources,
        n_tags,
        seed,
        user_factors: draw(n_users * k),
        resource_factors: draw(n_resources * k),
        tag_user_factors: draw(n_tags * k),
        tag_resource_factors: draw(n_tags * k),
    })
}

/// Names the four factor tables for external inspection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorTable {
    User,
    Resource,
    TagUser,
    TagResource,
}

impl PitfModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_resources(&self) -> usize {
        self.n_resources
    }

    pub fn n_tags(&self) -> usize {
        self.n_tags
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major view of a factor table.
    pub fn table(&self, which: FactorTable) -> &[f64] {
        match which {
            FactorTable::User => &self.user_factors,
            FactorTable::Resource => &self.resource_factors,
            FactorTable::TagUser => &self.tag_user_factors,
            FactorTable::TagResource => &self.tag_resource_factors,
        }
    }

    /// Mutable table access, for external calibration and gradient checks.
    pub fn table_mut(&mut self, which: FactorTable) -> &mut [f64] {
        match which {
            FactorTable::User => &mut self.user_factors,
            FactorTable::Resource => &mut self.resource_factors,
            FactorTable::TagUser => &mut self.tag_user_factors,
            FactorTable::TagResource => &mut self.tag_resource_factors,
        }
    }

    fn user_row(&self, u: usize) -> &[f64] {
        &self.user_factors[u * self.k..(u + 1) * self.k]
    }

    fn resource_row(&self, r: usize) -> &[f64] {
        &self.resource_factors[r * self.k..(r + 1) * self.k]
    }

    fn tag_user_row(&self, t: usize) -> &[f64] {
        &self.tag_user_factors[t * self.k..(t + 1) * self.k]
    }

    fn tag_resource_row(&self, t: usize) -> &[f64] {
        &self.tag_resource_factors[t * self.k..(t + 1) * self.k]
    }

    /// Bilinear score; errors on out-of-range indices.
    pub fn score(&self, u: usize, r: usize, t: usize) -> Result<f64> {
        if u >= self.n_users || r >= self.n_resources || t >= self.n_tags {
            return Err(Error::InvalidParam(format!(
                "index out of range: ({u}, {r}, {t}) vs ({}, {}, {})",
                self.n_users, self.n_resources, self.n_tags
            )));
        }
        Ok(self.score_unchecked(u, r, t))
    }

    fn score_unchecked(&self, u: usize, r: usize, t: usize) -> f64 {
        let k = self.k;
        let (uf, tu) = (self.user_row(u), self.tag_user_row(t));
        let (rf, tr) = (self.resource_row(r), self.tag_resource_row(t));
        let mut sum = 0.0;
        for f in 0..k {
            sum += uf[f] * tu[f] + rf[f] * tr[f];
        }
        sum
    }

    /// One SGD step on ln σ(ŷ(u,r,t_pos) − ŷ(u,r,t_neg)) − (γ/2)‖θ‖² over
    /// the six involved rows. Gradients are evaluated at the incoming
    /// parameter values, then all rows update simultaneously.
    pub fn bpr_step(
        &mut self,
        u: usize,
        r: usize,
        t_pos: usize,
        t_neg: usize,
        learn_rate: f64,
        regularization: f64,
    ) {
        debug_assert_ne!(t_pos, t_neg);
        let k = self.k;
        let x = self.score_unchecked(u, r, t_pos) - self.score_unchecked(u, r, t_neg);
        let delta = 1.0 / (1.0 + x.exp());

        let uf: Vec<f64> = self.user_row(u).to_vec();
        let rf: Vec<f64> = self.resource_row(r).to_vec();
        let tup: Vec<f64> = self.tag_user_row(t_pos).to_vec();
        let tun: Vec<f64> = self.tag_user_row(t_neg).to_vec();
        let trp: Vec<f64> = self.tag_resource_row(t_pos).to_vec();
        let trn: Vec<f64> = self.tag_resource_row(t_neg).to_vec();

        for f in 0..k {
            self.user_factors[u * k + f] +=
                learn_rate * (delta * (tup[f] - tun[f]) - regularization * uf[f]);
            self.resource_factors[r * k + f] +=
                learn_rate * (delta * (trp[f] - trn[f]) - regularization * rf[f]);
            self.tag_user_factors[t_pos * k + f] +=
                learn_rate * (delta * uf[f] - regularization * tup[f]);
            self.tag_user_factors[t_neg * k + f] +=
                learn_rate * (-delta * uf[f] - regularization * tun[f]);
            self.tag_resource_factors[t_pos * k + f] +=
                learn_rate * (delta * rf[f] - regularization * trp[f]);
            self.tag_resource_factors[t_neg * k + f] +=
                learn_rate * (-delta * rf[f] - regularization * trn[f]);
        }
    }

    /// Versioned binary checkpoint; round-trips bitwise.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        for dim in [self.k, self.n_users, self.n_resources, self.n_tags] {
            w.write_all(&(dim as u64).to_le_bytes())?;
        }
        w.write_all(&self.seed.to_le_bytes())?;
        for table in [
            &self.user_factors,
            &self.resource_factors,
            &self.tag_user_factors,
            &self.tag_resource_factors,
        ] {
            for &v in table.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<PitfModel> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::ModelFormat("bad magic".into()));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let version = u32::from_le_bytes(buf4);
        if version != CHECKPOINT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {version}"
            )));
        }
        let read_u64 = |r: &mut R| -> Result<u64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        };
        let k = read_u64(&mut r)? as usize;
        let n_users = read_u64(&mut r)? as usize;
        let n_resources = read_u64(&mut r)? as usize;
        let n_tags = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        if k < 1 || n_users < 1 || n_resources < 1 || n_tags < 1 {
            return Err(Error::ModelFormat("degenerate dimensions".into()));
        }
        let read_table = |r: &mut R, len: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(len);
            let mut b = [0u8; 8];
            for _ in 0..len {
                r.read_exact(&mut b)?;
                out.push(f64::from_le_bytes(b));
            }
            Ok(out)
        };
        Ok(PitfModel {
            k,
            n_users,
            n_resources,
            n_tags,
            seed,
            user_factors: read_table(&mut r, n_users * k)?,
            resource_factors: read_table(&mut r, n_resources * k)?,
            tag_user_factors: read_table(&mut r, n_tags * k)?,
            tag_resource_factors: read_table(&mut r, n_tags * k)?,
        })
    }
}

/// Trains on every (post, tag) positive incidence, epoch by epoch, visiting
/// positives in seeded-shuffled order and sampling `cfg.negatives` tags not
/// present in the post for each.
pub fn train(mut model: PitfModel, train: &Folksonomy, cfg: &TrainConfig) -> Result<PitfModel> {
    cfg.validate()?;
    if train.post_count() == 0 {
        return Err(Error::EmptyDataset);
    }
    if model.n_tags <= 1 {
        return Err(Error::InvalidParam(
            "training needs at least 2 tags to sample negatives".into(),
        ));
    }
    let mut positives: Vec<(usize, TagId)> = Vec::new();
    for (i, post) in train.posts().iter().enumerate() {
        for &t in post.tags() {
            positives.push((i, t));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.epochs {
        positives.shuffle(&mut rng);
        for &(post_idx, t_pos) in &positives {
            let post = &train.posts()[post_idx];
            if post.tags().len() >= model.n_tags {
                // No negative exists for this post.
                continue;
            }
            for _ in 0..cfg.negatives {
                let t_neg = loop {
                    let cand = TagId(rng.random_range(0..model.n_tags as u32));
                    if !post.has_tag(cand) {
                        break cand;
                    }
                };
                model.bpr_step(
                    post.user.0 as usize,
                    post.resource.0 as usize,
                    t_pos.0 as usize,
                    t_neg.0 as usize,
                    cfg.learn_rate,
                    cfg.regularization,
                );
            }
        }
    }
    Ok(model)
}

/// Mean sampled BPR loss −ln σ(ŷ+ − ŷ−) over a fixed evaluation sample;
/// used to track that training makes progress.
pub fn sampled_bpr_loss(model: &PitfModel, train: &Folksonomy, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let posts = train.posts();
    let mut total = 0.0;
    let mut n = 0usize;
    let mut attempts = 0usize;
    while n < samples && attempts < samples.saturating_mul(100) {
        attempts += 1;
        let post = &posts[rng.random_range(0..posts.len())];
        if post.tags().len() >= model.n_tags {
            continue;
        }
        let t_pos = post.tags()[rng.random_range(0..post.tags().len())];
        let t_neg = loop {
            let cand = TagId(rng.random_range(0..model.n_tags as u32));
            if !post.has_tag(cand) {
                break cand;
            }
        };
        let x = model.score_unchecked(
            post.user.0 as usize,
            post.resource.0 as usize,
            t_pos.0 as usize,
        ) - model.score_unchecked(
            post.user.0 as usize,
            post.resource.0 as usize,
            t_neg.0 as usize,
        );
        total += (1.0 + (-x).exp()).ln();
        n += 1;
    }
    if n == 0 {
        return f64::NAN;
    }
    total / n as f64
}

/// Scores every tag in the vocabulary for the query (user, resource).
pub struct PitfPredictor {
    model: PitfModel,
}

impl PitfPredictor {
    pub fn fit(
        train_set: &Arc<Folksonomy>,
        k: usize,
        cfg: &TrainConfig,
    ) -> Result<PitfPredictor> {
        let model = init_model(
            train_set.vocab().users.len().max(1),
            train_set.vocab().resources.len().max(1),
            train_set.vocab().tags.len().max(1),
            k,
            cfg.seed,
        )?;
        Ok(PitfPredictor {
            model: train(model, train_set, cfg)?,
        })
    }

    pub fn from_model(model: PitfModel) -> PitfPredictor {
        PitfPredictor { model }
    }

    pub fn model(&self) -> &PitfModel {
        &self.model
    }
}

impl TagPredictor for PitfPredictor {
    fn name(&self) -> &str {
        "pitf"
    }

    fn score(&self, user: UserId, resource: ResourceId, _t_ref: i64) -> TagScores {
        let (u, r) = (user.0 as usize, resource.0 as usize);
        if u >= self.model.n_users || r >= self.model.n_resources {
            return TagScores::new();
        }
        (0..self.model.n_tags)
            .map(|t| (TagId(t as u32), self.model.score_unchecked(u, r, t)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folksonomy::parse_posts;
    use std::io::Cursor;

    fn parse(s: &str) -> Arc<Folksonomy> {
        Arc::new(parse_posts(Cursor::new(s)).unwrap())
    }

    #[test]
    fn same_seed_same_model() {
        let a = init_model(3, 4, 5, 8, 99).unwrap();
        let b = init_model(3, 4, 5, 8, 99).unwrap();
        assert_eq!(a, b);
        let c = init_model(3, 4, 5, 8, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn minimal_model_is_finite() {
        let m = init_model(1, 1, 1, 1, 7).unwrap();
        assert!(m.user_factors.len() == 1 && m.user_factors[0].is_finite());
        assert!(m.tag_resource_factors[0].is_finite());
    }

    #[test]
    fn init_rejects_degenerate_dims() {
        assert!(init_model(0, 1, 1, 4, 0).is_err());
        assert!(init_model(1, 1, 1, 0, 0).is_err());
    }

    #[test]
    fn init_mean_is_statistically_centered() {
        // 4 tables x 250 rows x 100 factors = 100,000 draws.
        let m = init_model(250, 250, 250, 100, 5).unwrap();
        let entries: Vec<f64> = m
            .user_factors
            .iter()
            .chain(&m.resource_factors)
            .chain(&m.tag_user_factors)
            .chain(&m.tag_resource_factors)
            .copied()
            .collect();
        let n = entries.len();
        assert_eq!(n, 100_000);
        let mean = entries.iter().sum::<f64>() / n as f64;
        // Three standard errors of the mean for sigma = 0.01.
        assert!(mean.abs() < 3.0 * 0.01 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn score_is_the_bilinear_sum() {
        let mut m = init_model(1, 1, 1, 1, 0).unwrap();
        m.user_factors[0] = 2.0;
        m.tag_user_factors[0] = 3.0;
        m.resource_factors[0] = 1.0;
        m.tag_resource_factors[0] = 5.0;
        assert_eq!(m.score(0, 0, 0).unwrap(), 11.0);
        assert!(m.score(1, 0, 0).is_err());
        assert!(m.score(0, 0, 9).is_err());
    }

    #[test]
    fn zero_model_scores_zero() {
        let mut m = init_model(2, 2, 3, 4, 1).unwrap();
        m.user_factors.iter_mut().for_each(|v| *v = 0.0);
        m.resource_factors.iter_mut().for_each(|v| *v = 0.0);
        m.tag_user_factors.iter_mut().for_each(|v| *v = 0.0);
        m.tag_resource_factors.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..3 {
            assert_eq!(m.score(1, 1, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn score_matches_naive_loop_oracle() {
        let m = init_model(5, 6, 7, 12, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let (u, r, t) = (
                rng.random_range(0..5usize),
                rng.random_range(0..6usize),
                rng.random_range(0..7usize),
            );
            let mut expected = 0.0;
            for f in 0..12 {
                expected += m.user_factors[u * 12 + f] * m.tag_user_factors[t * 12 + f];
                expected +=
                    m.resource_factors[r * 12 + f] * m.tag_resource_factors[t * 12 + f];
            }
            assert!((m.score(u, r, t).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinearity_in_tag_rows() {
        let m0 = init_model(2, 2, 3, 6, 9).unwrap();
        let mut m = m0.clone();
        let t = 1usize;
        let c = 3.5;
        for f in 0..6 {
            m.tag_user_factors[t * 6 + f] *= c;
            m.tag_resource_factors[t * 6 + f] *= c;
        }
        for u in 0..2 {
            for r in 0..2 {
                let before = m0.score(u, r, t).unwrap();
                let after = m.score(u, r, t).unwrap();
                assert!((after - c * before).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_learn_rate_is_identity() {
        let m0 = init_model(2, 2, 3, 4, 11).unwrap();
        let mut m = m0.clone();
        m.bpr_step(0, 1, 0, 2, 0.0, 0.0);
        assert_eq!(m, m0);
    }

    #[test]
    fn saturated_pair_barely_moves() {
        let mut m = init_model(1, 1, 2, 1, 0).unwrap();
        // Make x = ŷ+ − ŷ− hugely positive.
        m.user_factors[0] = 10.0;
        m.tag_user_factors[0] = 10.0; // positive tag
        m.tag_user_factors[1] = -10.0; // negative tag
        m.resource_factors[0] = 0.0;
        let before = m.clone();
        m.bpr_step(0, 0, 0, 1, 0.1, 0.0);
        let moved: f64 = m
            .user_factors
            .iter()
            .zip(&before.user_factors)
            .map(|(a, b)| (a - b).abs())
            .sum();
        assert!(moved < 1e-10, "moved {moved}");
    }

    #[test]
    fn untouched_rows_stay_bitwise_identical() {
        let m0 = init_model(3, 3, 5, 4, 2).unwrap();
        let mut m = m0.clone();
        m.bpr_step(1, 2, 0, 3, 0.05, 1e-4);
        // Users 0 and 2 untouched.
        assert_eq!(m.user_row(0), m0.user_row(0));
        assert_eq!(m.user_row(2), m0.user_row(2));
        assert_eq!(m.resource_row(0), m0.resource_row(0));
        assert_eq!(m.tag_user_row(1), m0.tag_user_row(1));
        assert_eq!(m.tag_user_row(2), m0.tag_user_row(2));
        assert_eq!(m.tag_user_row(4), m0.tag_user_row(4));
        // Touched rows moved.
        assert_ne!(m.user_row(1), m0.user_row(1));
        assert_ne!(m.tag_user_row(0), m0.tag_user_row(0));
        assert_ne!(m.tag_user_row(3), m0.tag_user_row(3));
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        // Objective: ln σ(x) − (γ/2)·Σ‖row‖² over the six involved rows.
        // The analytic update direction is (θ_after − θ_before)/α.
        let gamma = 1e-3;
        let step = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for case in 0..25 {
            let k = 4;
            let mut m = init_model(2, 2, 3, k, 1000 + case).unwrap();
            // Larger entries keep the gradient well away from zero.
            for table in [
                &mut m.user_factors,
                &mut m.resource_factors,
                &mut m.tag_user_factors,
                &mut m.tag_resource_factors,
            ] {
                table.iter_mut().for_each(|v| *v *= 30.0);
            }
            let (u, r) = (rng.random_range(0..2), rng.random_range(0..2));
            let t_pos = rng.random_range(0..3);
            let t_neg = (t_pos + 1 + rng.random_range(0..2)) % 3;

            let objective = |m: &PitfModel| -> f64 {
                let x = m.score_unchecked(u, r, t_pos) - m.score_unchecked(u, r, t_neg);
                let reg: f64 = [
                    m.user_row(u),
                    m.resource_row(r),
                    m.tag_user_row(t_pos),
                    m.tag_user_row(t_neg),
                    m.tag_resource_row(t_pos),
                    m.tag_resource_row(t_neg),
                ]
                .iter()
                .flat_map(|row| row.iter())
                .map(|v| v * v)
                .sum();
                -(1.0 + (-x).exp()).ln() - gamma / 2.0 * reg
            };

            let alpha = 1.0;
            let mut stepped = m.clone();
            stepped.bpr_step(u, r, t_pos, t_neg, alpha, gamma);

            // Check each coordinate of each involved row.
            let coords: Vec<(usize, usize)> = {
                let mut c = Vec::new();
                for f in 0..k {
                    c.push((0, u * k + f));
                    c.push((1, r * k + f));
                    c.push((2, t_pos * k + f));
                    c.push((2, t_neg * k + f));
                    c.push((3, t_pos * k + f));
                    c.push((3, t_neg * k + f));
                }
                c
            };
            for (table, idx) in coords {
                let analytic = {
                    let get = |m: &PitfModel| match table {
                        0 => m.user_factors[idx],
                        1 => m.resource_factors[idx],
                        2 => m.tag_user_factors[idx],
                        _ => m.tag_resource_factors[idx],
                    };
                    (get(&stepped) - get(&m)) / alpha
                };
                let numeric = {
                    let mut plus = m.clone();
                    let mut minus = m.clone();
                    let bump = |m: &mut PitfModel, by: f64| match table {
                        0 => m.user_factors[idx] += by,
                        1 => m.resource_factors[idx] += by,
                        2 => m.tag_user_factors[idx] += by,
                        _ => m.tag_resource_factors[idx] += by,
                    };
                    bump(&mut plus, step);
                    bump(&mut minus, -step);
                    (objective(&plus) - objective(&minus)) / (2.0 * step)
                };
                if numeric.abs() > 1e-6 {
                    let rel = (analytic - numeric).abs() / numeric.abs();
                    assert!(rel < 1e-4, "case {case}: rel {rel}");
                } else {
                    assert!((analytic - numeric).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let f = parse(concat!(
            "u1\tr1\t1\ta,b\n",
            "u1\tr2\t2\tc\n",
            "u2\tr1\t3\tb,c\n",
            "u2\tr3\t4\ta\n",
        ));
        let cfg = TrainConfig {
            epochs: 5,
            seed: 31,
            ..TrainConfig::default()
        };
        let m0 = init_model(2, 3, 3, 4, cfg.seed).unwrap();
        let a = train(m0.clone(), &f, &cfg).unwrap();
        let b = train(m0, &f, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_tag_vocabulary_is_an_error() {
        let f = parse("u1\tr1\t1\ta\nu1\tr2\t2\ta\n");
        let m = init_model(1, 2, 1, 4, 0).unwrap();
        let err = train(m, &f, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidParam(_)));
    }

    #[test]
    fn epoch_loss_decreases_on_structured_data() {
        // Two user groups with disjoint tag vocabularies.
        let mut text = String::new();
        for u in 0..10 {
            for p in 0..6 {
                let (g, tag) = if u < 5 { ("a", p % 3) } else { ("b", p % 3) };
                text.push_str(&format!(
                    "u{u:02}\tr{u:02}_{p}\t{}\t{g}{tag},{g}{}\n",
                    1000 + p * 100,
                    (p + 1) % 3
                ));
            }
        }
        let f = parse(&text);
        let m0 = init_model(
            f.vocab().users.len(),
            f.vocab().resources.len(),
            f.vocab().tags.len(),
            8,
            77,
        )
        .unwrap();
        let loss_at = |epochs: usize| {
            let cfg = TrainConfig {
                epochs,
                seed: 77,
                ..TrainConfig::default()
            };
            sampled_bpr_loss(&train(m0.clone(), &f, &cfg).unwrap(), &f, 400, 5)
        };
        let (epoch1, epoch5) = (loss_at(1), loss_at(5));
        assert!(epoch5 < epoch1, "loss epoch1 {epoch1} -> epoch5 {epoch5}");
    }

    #[test]
    fn one_epoch_trains_every_positive_incidence() {
        // Post {a, b} can only sample c as a negative; post {c} samples a or
        // b. One epoch must move both user rows and all three tag rows.
        let f = parse("u\tr\t100\ta,b\nother\tr2\t1\tc\n");
        assert_eq!(f.vocab().tags.len(), 3);
        let m0 = init_model(2, 2, 3, 4, 9).unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            negatives: 2,
            seed: 9,
            ..TrainConfig::default()
        };
        let trained = train(m0.clone(), &f, &cfg).unwrap();
        for user in ["u", "other"] {
            let u = f.vocab().users.id(user).unwrap() as usize;
            assert_ne!(trained.user_row(u), m0.user_row(u), "user {user}");
        }
        for t in 0..3 {
            assert_ne!(trained.tag_user_row(t), m0.tag_user_row(t), "tag {t}");
        }
    }

    #[test]
    fn checkpoint_round_trips_bitwise() {
        let f = parse("u1\tr1\t1\ta,b\nu2\tr2\t2\tb,c\n");
        let cfg = TrainConfig {
            epochs: 2,
            seed: 13,
            ..TrainConfig::default()
        };
        let m = train(
            init_model(2, 2, 3, 4, cfg.seed).unwrap(),
            &f,
            &cfg,
        )
        .unwrap();
        let mut bytes = Vec::new();
        m.save(&mut bytes).unwrap();
        let loaded = PitfModel::load(Cursor::new(&bytes)).unwrap();
        assert_eq!(m, loaded);
        let mut bytes2 = Vec::new();
        loaded.save(&mut bytes2).unwrap();
        assert_eq!(bytes, bytes2);
        // Corrupt magic.
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(PitfModel::load(Cursor::new(&bad)).is_err());
    }
}
