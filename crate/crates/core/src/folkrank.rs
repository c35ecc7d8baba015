//! Adapted PageRank over the tripartite folksonomy graph, plus the
//! differential ranking: rank with a preference biased toward the query
//! user and resource, minus the unbiased rank.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::folksonomy::Folksonomy;
use crate::ids::{ResourceId, TagId, UserId};
use crate::predictor::{TagPredictor, TagScores};

/// How post incidences turn into edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeWeighting {
    /// Accumulated incidence counts.
    #[default]
    Counts,
    /// 1.0 for any connected pair.
    Binary,
}

/// Undirected weighted graph over user, resource and tag nodes. Node layout:
/// users, then resources, then tags, each block in vocabulary order.
#[derive(Debug, Clone)]
pub struct FolkGraph {
    n_users: usize,
    n_resources: usize,
    n_tags: usize,
    adjacency: Vec<Vec<(u32, f64)>>,
    degree: Vec<f64>,
}

impl FolkGraph {
    pub fn node_count(&self) -> usize {
        self.n_users + self.n_resources + self.n_tags
    }

    pub fn user_node(&self, u: UserId) -> usize {
        u.0 as usize
    }

    pub fn resource_node(&self, r: ResourceId) -> usize {
        self.n_users + r.0 as usize
    }

    pub fn tag_node(&self, t: TagId) -> usize {
        self.n_users + self.n_resources + t.0 as usize
    }

    pub fn tag_of_node(&self, node: usize) -> Option<TagId> {
        let base = self.n_users + self.n_resources;
        (node >= base).then(|| TagId((node - base) as u32))
    }

    pub fn degree(&self, node: usize) -> f64 {
        self.degree[node]
    }

    pub fn user_count(&self) -> usize {
        self.n_users
    }

    pub fn resource_count(&self) -> usize {
        self.n_resources
    }

    pub fn tag_count(&self) -> usize {
        self.n_tags
    }

    /// Weighted neighbors of a node, ascending by node index.
    pub fn neighbors(&self, node: usize) -> &[(u32, f64)] {
        &self.adjacency[node]
    }
}

/// Builds the entity graph from train posts. For a post (u, r, S):
/// weight(u, r) += |S|, and for each tag i in S, weight(u, i) += 1 and
/// weight(r, i) += 1.
pub fn build_graph(train: &Folksonomy, weighting: EdgeWeighting) -> Result<FolkGraph> {
    if train.post_count() == 0 {
        return Err(Error::EmptyDataset);
    }
    let n_users = train.vocab().users.len();
    let n_resources = train.vocab().resources.len();
    let n_tags = train.vocab().tags.len();
    let n = n_users + n_resources + n_tags;

    let mut weights: HashMap<(u32, u32), f64> = HashMap::new();
    let mut bump = |a: usize, b: usize, w: f64| {
        let key = if a < b { (a as u32, b as u32) } else { (b as u32, a as u32) };
        *weights.entry(key).or_insert(0.0) += w;
    };
    for post in train.posts() {
        let u = post.user.0 as usize;
        let r = n_users + post.resource.0 as usize;
        bump(u, r, post.tags().len() as f64);
        for &t in post.tags() {
            let t = n_users + n_resources + t.0 as usize;
            bump(u, t, 1.0);
            bump(r, t, 1.0);
        }
    }

    let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (&(a, b), &w) in &weights {
        let w = match weighting {
            EdgeWeighting::Counts => w,
            EdgeWeighting::Binary => 1.0,
        };
        adjacency[a as usize].push((b, w));
        adjacency[b as usize].push((a, w));
    }
    for row in &mut adjacency {
        row.sort_unstable_by_key(|&(node, _)| node);
    }
    let degree = adjacency
        .iter()
        .map(|row| row.iter().map(|&(_, w)| w).sum())
        .collect();
    Ok(FolkGraph {
        n_users,
        n_resources,
        n_tags,
        adjacency,
        degree,
    })
}

/// Power iteration of w <- d * M * w + (1 - d) * p on the column-stochastic
/// transition operator of the graph, until the L1 step falls within `tol`
/// or `max_iter` iterations elapse. Nodes with zero degree distribute
/// uniformly (dangling fix).
pub fn pagerank(
    graph: &FolkGraph,
    preference: &[f64],
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = graph.node_count();
    if preference.len() != n {
        return Err(Error::InvalidParam(format!(
            "preference length {} != node count {n}",
            preference.len()
        )));
    }
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidParam(format!(
            "damping must be in (0, 1), got {damping}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParam(format!("tol must be > 0, got {tol}")));
    }
    if max_iter < 1 {
        return Err(Error::InvalidParam("max_iter must be >= 1".into()));
    }
    let sum: f64 = preference.iter().sum();
    if preference.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParam(
            "preference must be non-negative and sum to 1".into(),
        ));
    }

    let mut current = preference.to_vec();
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut dangling = 0.0;
        for ((&weight, &deg), row) in current.iter().zip(&graph.degree).zip(&graph.adjacency) {
            if deg == 0.0 {
                dangling += weight;
                continue;
            }
            let share = weight / deg;
            for &(y, w) in row {
                next[y as usize] += share * w;
            }
        }
        let dangling_share = dangling / n as f64;
        let mut step = 0.0;
        for y in 0..n {
            let v = damping * (next[y] + dangling_share) + (1.0 - damping) * preference[y];
            step += (v - current[y]).abs();
            next[y] = v;
        }
        std::mem::swap(&mut current, &mut next);
        if step <= tol {
            break;
        }
    }
    Ok(current)
}

/// FolkRank configuration. The damping doubles as the preference weighting.
#[derive(Debug, Clone, Copy)]
pub struct FolkRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub weighting: EdgeWeighting,
}

impl Default for FolkRankParams {
    fn default() -> Self {
        FolkRankParams {
            damping: 0.7,
            tol: 1e-8,
            max_iter: 200,
            weighting: EdgeWeighting::Counts,
        }
    }
}

/// Differential PageRank predictor.
pub struct FolkRankPredictor {
    graph: FolkGraph,
    baseline: Vec<f64>,
    params: FolkRankParams,
}

impl FolkRankPredictor {
    pub fn fit(train: &Arc<Folksonomy>, params: FolkRankParams) -> Result<FolkRankPredictor> {
        let graph = build_graph(train, params.weighting)?;
        let n = graph.node_count();
        let uniform = vec![1.0 / n as f64; n];
        let baseline = pagerank(&graph, &uniform, params.damping, params.tol, params.max_iter)?;
        Ok(FolkRankPredictor {
            graph,
            baseline,
            params,
        })
    }

    pub fn graph(&self) -> &FolkGraph {
        &self.graph
    }

    /// score(i) = w_pref(i) - w_base(i) over tag nodes. The preferential run
    /// starts from uniform mass plus |U| extra at the user node and |R|
    /// extra at the resource node; nodes unseen in training (zero degree)
    /// receive no extra mass. When neither node receives mass the two runs
    /// coincide and every differential score is exactly zero.
    pub fn differential_scores(&self, user: UserId, resource: ResourceId) -> TagScores {
        let n = self.graph.node_count();
        let mut preference = vec![1.0 / n as f64; n];
        let mut extra = 0.0;
        let u_node = self.graph.user_node(user);
        if u_node < n && self.graph.degree(u_node) > 0.0 {
            preference[u_node] += self.graph.n_users as f64;
            extra += self.graph.n_users as f64;
        }
        let r_node = self.graph.resource_node(resource);
        if (resource.0 as usize) < self.graph.n_resources && self.graph.degree(r_node) > 0.0 {
            preference[r_node] += self.graph.n_resources as f64;
            extra += self.graph.n_resources as f64;
        }
        let total = 1.0 + extra;
        preference.iter_mut().for_each(|v| *v /= total);

        let preferred = pagerank(
            &self.graph,
            &preference,
            self.params.damping,
            self.params.tol,
            self.params.max_iter,
        )
        .expect("preference vector is stochastic by construction");

        let tag_base = self.graph.n_users + self.graph.n_resources;
        (tag_base..n)
            .map(|node| {
                let tag = self.graph.tag_of_node(node).unwrap();
                (tag, preferred[node] - self.baseline[node])
            })
            .collect()
    }
}

impl TagPredictor for FolkRankPredictor {
    fn name(&self) -> &str {
        "folkrank"
    }

    fn score(&self, user: UserId, resource: ResourceId, _t_ref: i64) -> TagScores {
        self.differential_scores(user, resource)
    }
}
