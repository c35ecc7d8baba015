//! Seeded synthetic folksonomy generator.
//!
//! Each user emits a post sequence. Every tag slot is drawn from a weighted
//! mixture: reusing one of the user's own earlier tags with weight
//! proportional to the power-law-decayed sum over its prior usages
//! (sum_j dt_j^(-d_gen), dt in days), picking up a tag already on the
//! post's resource with weight proportional to context_strength times its
//! count there, or drawing a fresh tag with a fixed weight. Resources come
//! from a shared pool at the configured rate, which controls narrowness.
//! Fully deterministic per seed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::folksonomy::{Folksonomy, PostRecord, SECONDS_PER_DAY};

/// Generator configuration.
#[derive(Debug, Clone)]
pub struct SynthParams {
    pub users: usize,
    pub posts_per_user: usize,
    /// Tag vocabulary size.
    pub vocab_size: usize,
    pub tags_per_post: usize,
    /// Power-law decay exponent of the reuse weight (d_gen).
    pub reuse_decay: f64,
    /// Weight multiplier for tags already on the post's resource.
    pub context_strength: f64,
    /// Probability of drawing the resource from the shared pool.
    pub resource_sharing: f64,
    /// Shared resource pool size; 0 derives users * posts_per_user / 50.
    pub shared_resources: usize,
    /// Weight of drawing a fresh tag instead of reusing.
    pub fresh_weight: f64,
    /// Interest drift in [0, 1]: how far a user's fresh-tag window moves
    /// across the vocabulary over their posting history. 0 = uniform.
    pub drift: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            users: 100,
            posts_per_user: 20,
            vocab_size: 500,
            tags_per_post: 3,
            reuse_decay: 0.5,
            context_strength: 1.0,
            resource_sharing: 0.0,
            shared_resources: 0,
            fresh_weight: 1.0,
            drift: 0.0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.users < 1 {
            return Err(Error::InvalidParam("synth.users must be >= 1".into()));
        }
        if self.posts_per_user < 1 {
            return Err(Error::InvalidParam(
                "synth.posts_per_user must be >= 1".into(),
            ));
        }
        if self.vocab_size < 1 {
            return Err(Error::InvalidParam("synth.vocab must be >= 1".into()));
        }
        if self.tags_per_post < 1 || self.tags_per_post > self.vocab_size {
            return Err(Error::InvalidParam(format!(
                "synth.tags_per_post must be in 1..={}, got {}",
                self.vocab_size, self.tags_per_post
            )));
        }
        if self.reuse_decay.is_nan() || self.reuse_decay < 0.0 {
            return Err(Error::InvalidParam("synth.d_gen must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.resource_sharing) {
            return Err(Error::InvalidParam(
                "synth.sharing must be in [0, 1]".into(),
            ));
        }
        if self.context_strength.is_nan() || self.context_strength < 0.0 {
            return Err(Error::InvalidParam(
                "synth.context_strength must be >= 0".into(),
            ));
        }
        if self.fresh_weight.is_nan() || self.fresh_weight <= 0.0 {
            return Err(Error::InvalidParam(
                "synth.fresh_weight must be > 0".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.drift) {
            return Err(Error::InvalidParam("synth.drift must be in [0, 1]".into()));
        }
        Ok(())
    }
}

const BASE_TIME: i64 = 1_500_000_000;

pub fn synth_folksonomy(params: &SynthParams, seed: u64) -> Result<Folksonomy> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool_size = if params.shared_resources > 0 {
        params.shared_resources
    } else {
        (params.users * params.posts_per_user / 50).max(1)
    };

    // Tags already on each resource (by any user), with counts.
    let mut resource_tags: HashMap<usize, BTreeMap<usize, u32>> = HashMap::new();
    let mut fresh_resource = 0usize;
    let mut records = Vec::with_capacity(params.users * params.posts_per_user);

    let digits_t = digits(params.vocab_size);
    // Resource namespace: shared pool ids first, fresh ones appended.
    let id_of_shared = |i: usize| format!("s{i:08}");
    let id_of_fresh = |i: usize| format!("f{i:08}");

    // Per-user state: clock, (tag, time) usage history, posted resources,
    // fresh-tag window phase.
    let mut clock: Vec<i64> = (0..params.users)
        .map(|_| BASE_TIME + rng.random_range(0..30 * SECONDS_PER_DAY))
        .collect();
    let mut history: Vec<Vec<(usize, i64)>> = vec![Vec::new(); params.users];
    let mut used_resources: Vec<HashSet<usize>> = vec![HashSet::new(); params.users];
    let phase: Vec<usize> = (0..params.users)
        .map(|_| rng.random_range(0..params.vocab_size))
        .collect();
    let window = (params.vocab_size / 10).max(1);

    // Round-robin over post slots so shared-resource context accumulates
    // evenly across users as time advances.
    for post_idx in 0..params.posts_per_user {
        for user in 0..params.users {
            let t = clock[user] + rng.random_range(SECONDS_PER_DAY / 2..=2 * SECONDS_PER_DAY);
            clock[user] = t;

            let (resource_key, resource_name) =
                if rng.random::<f64>() < params.resource_sharing {
                    let candidate = rng.random_range(0..pool_size);
                    if used_resources[user].contains(&candidate) {
                        let id = fresh_resource;
                        fresh_resource += 1;
                        (usize::MAX - id, id_of_fresh(id))
                    } else {
                        (candidate, id_of_shared(candidate))
                    }
                } else {
                    let id = fresh_resource;
                    fresh_resource += 1;
                    (usize::MAX - id, id_of_fresh(id))
                };
            used_resources[user].insert(resource_key);

            // Candidate weights: own reuse activation plus context boost.
            let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
            for &(tag, used_at) in &history[user] {
                let days = ((t - used_at) as f64 / SECONDS_PER_DAY as f64).max(0.05);
                *weights.entry(tag).or_insert(0.0) += days.powf(-params.reuse_decay);
            }
            if params.context_strength > 0.0 {
                if let Some(on_resource) = resource_tags.get(&resource_key) {
                    for (&tag, &count) in on_resource {
                        *weights.entry(tag).or_insert(0.0) +=
                            params.context_strength * count as f64;
                    }
                }
            }
            let reuse_total: f64 = weights.values().sum();

            let mut tags: BTreeSet<usize> = BTreeSet::new();
            let mut attempts = 0;
            while tags.len() < params.tags_per_post {
                attempts += 1;
                let tag = if attempts > 50 * params.tags_per_post {
                    // Dense corner: fall back to the first unused tag.
                    (0..params.vocab_size)
                        .find(|c| !tags.contains(c))
                        .expect("tags_per_post <= vocab_size")
                } else {
                    let roll = rng.random::<f64>() * (params.fresh_weight + reuse_total);
                    if roll < params.fresh_weight || reuse_total == 0.0 {
                        self::fresh_tag(&mut rng, params, post_idx, phase[user], window)
                    } else {
                        let mut target = roll - params.fresh_weight;
                        let mut chosen = *weights.keys().next_back().unwrap();
                        for (&tag, &w) in &weights {
                            if target < w {
                                chosen = tag;
                                break;
                            }
                            target -= w;
                        }
                        chosen
                    }
                };
                tags.insert(tag);
            }

            let tag_names: Vec<String> = tags
                .iter()
                .map(|&tag| format!("t{tag:0digits_t$}"))
                .collect();
            for &tag in &tags {
                history[user].push((tag, t));
            }
            let entry = resource_tags.entry(resource_key).or_default();
            for &tag in &tags {
                *entry.entry(tag).or_insert(0) += 1;
            }
            records.push(PostRecord {
                user: format!("u{user:06}"),
                resource: resource_name,
                timestamp: t,
                tags: tag_names,
            });
        }
    }

    Folksonomy::from_records(records)
}

fn fresh_tag(
    rng: &mut ChaCha8Rng,
    params: &SynthParams,
    post_idx: usize,
    phase: usize,
    window: usize,
) -> usize {
    if params.drift == 0.0 {
        rng.random_range(0..params.vocab_size)
    } else {
        let progress = post_idx as f64 / params.posts_per_user as f64;
        let center = (progress * params.drift * params.vocab_size as f64) as usize;
        (phase + center + rng.random_range(0..window)) % params.vocab_size
    }
}

fn digits(n: usize) -> usize {
    (n.max(1) as f64).log10().floor() as usize + 1
}
