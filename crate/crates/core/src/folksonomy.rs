//! Dataset model and ingestion.
//!
//! A folksonomy is a set of posts, each post one tagging event: a user
//! annotating one resource with a set of tags at a point in time. The
//! on-disk format is one post per line, four TAB-separated fields:
//!
//! ```text
//! user<TAB>resource<TAB>unix_timestamp<TAB>tag1,tag2,...
//! ```
//!
//! Lines beginning with `#` and blank lines are ignored. Tags are trimmed
//! and case-folded at parse time; duplicate tags within a line collapse.
//! When the same (user, resource) pair occurs on several lines, the post
//! with the latest timestamp wins (the later line on ties).

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ids::{ResourceId, TagId, UserId, Vocab, Vocabularies};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Raw, un-interned post as read from a file or produced by a generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostRecord {
    pub user: String,
    pub resource: String,
    pub timestamp: i64,
    pub tags: Vec<String>,
}

/// One tagging event with interned ids. Tags are sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub user: UserId,
    pub resource: ResourceId,
    pub timestamp: i64,
    tags: Vec<TagId>,
}

impl Post {
    fn new(user: UserId, resource: ResourceId, timestamp: i64, mut tags: Vec<TagId>) -> Post {
        tags.sort_unstable();
        tags.dedup();
        Post {
            user,
            resource,
            timestamp,
            tags,
        }
    }

    pub fn tags(&self) -> &[TagId] {
        &self.tags
    }

    pub fn has_tag(&self, tag: TagId) -> bool {
        self.tags.binary_search(&tag).is_ok()
    }
}

/// Indexed, immutable collection of posts.
#[derive(Debug, Clone)]
pub struct Folksonomy {
    vocab: Arc<Vocabularies>,
    posts: Vec<Post>,
    /// Per-user post indices, sorted non-decreasing by timestamp (stable).
    user_posts: Vec<Vec<usize>>,
    /// Per-resource post indices, in post order.
    resource_posts: Vec<Vec<usize>>,
    user_count: usize,
    resource_count: usize,
    tag_count: usize,
}

impl Folksonomy {
    /// Builds a folksonomy from raw records, enforcing all invariants:
    /// non-empty deduplicated tag sets, non-negative timestamps, and at most
    /// one post per (user, resource) pair (latest timestamp wins, later
    /// record on ties). Vocabularies are interned in lexicographic order.
    pub fn from_records(records: Vec<PostRecord>) -> Result<Folksonomy> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for rec in &records {
            if rec.timestamp < 0 {
                return Err(Error::InvalidParam(format!(
                    "negative timestamp {} for user `{}`",
                    rec.timestamp, rec.user
                )));
            }
            if rec.tags.is_empty() {
                return Err(Error::InvalidParam(format!(
                    "empty tag set for user `{}` resource `{}`",
                    rec.user, rec.resource
                )));
            }
        }

        // Deduplicate (user, resource): keep the record with the largest
        // timestamp, the later record winning ties. Posts keep the position
        // of the pair's first appearance.
        let mut slot: HashMap<(String, String), usize> = HashMap::new();
        let mut kept: Vec<PostRecord> = Vec::with_capacity(records.len());
        for rec in records {
            let key = (rec.user.clone(), rec.resource.clone());
            match slot.get(&key) {
                Some(&i) => {
                    if rec.timestamp >= kept[i].timestamp {
                        kept[i] = rec;
                    }
                }
                None => {
                    slot.insert(key, kept.len());
                    kept.push(rec);
                }
            }
        }

        let vocab = Arc::new(Vocabularies {
            users: Vocab::from_names(kept.iter().map(|r| r.user.clone())),
            resources: Vocab::from_names(kept.iter().map(|r| r.resource.clone())),
            tags: Vocab::from_names(kept.iter().flat_map(|r| r.tags.iter().cloned())),
        });

        let posts = kept
            .into_iter()
            .map(|rec| {
                let user = UserId(vocab.users.id(&rec.user).unwrap());
                let resource = ResourceId(vocab.resources.id(&rec.resource).unwrap());
                let tags = rec
                    .tags
                    .iter()
                    .map(|t| TagId(vocab.tags.id(t).unwrap()))
                    .collect();
                Post::new(user, resource, rec.timestamp, tags)
            })
            .collect();

        Ok(Folksonomy::from_parts(vocab, posts))
    }

    /// Rebuilds indices and distinct counts for an already-interned post set.
    /// Used both by `from_records` and by the chronological split, which
    /// shares the parent vocabulary.
    pub(crate) fn from_parts(vocab: Arc<Vocabularies>, posts: Vec<Post>) -> Folksonomy {
        let mut user_posts = vec![Vec::new(); vocab.users.len()];
        let mut resource_posts = vec![Vec::new(); vocab.resources.len()];
        let mut tag_seen = vec![false; vocab.tags.len()];
        for (i, post) in posts.iter().enumerate() {
            user_posts[post.user.0 as usize].push(i);
            resource_posts[post.resource.0 as usize].push(i);
            for t in post.tags() {
                tag_seen[t.0 as usize] = true;
            }
        }
        for idx in &mut user_posts {
            // Stable: ties keep post order, so the last tied maximum is the
            // most recently read post.
            idx.sort_by_key(|&i| posts[i].timestamp);
        }
        let user_count = user_posts.iter().filter(|v| !v.is_empty()).count();
        let resource_count = resource_posts.iter().filter(|v| !v.is_empty()).count();
        let tag_count = tag_seen.iter().filter(|&&s| s).count();
        Folksonomy {
            vocab,
            posts,
            user_posts,
            resource_posts,
            user_count,
            resource_count,
            tag_count,
        }
    }

    pub fn vocab(&self) -> &Arc<Vocabularies> {
        &self.vocab
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn post_count(&self) -> usize {
        self.posts.len()
    }

    /// Distinct users appearing in posts.
    pub fn user_count(&self) -> usize {
        self.user_count
    }

    /// Distinct resources appearing in posts.
    pub fn resource_count(&self) -> usize {
        self.resource_count
    }

    /// Distinct tags appearing in posts.
    pub fn tag_count(&self) -> usize {
        self.tag_count
    }

    /// Post indices of a user, sorted non-decreasing by timestamp.
    pub fn user_post_indices(&self, user: UserId) -> &[usize] {
        self.user_posts
            .get(user.0 as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn resource_post_indices(&self, resource: ResourceId) -> &[usize] {
        self.resource_posts
            .get(resource.0 as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// User ids with at least one post, ascending.
    pub fn users_with_posts(&self) -> impl Iterator<Item = UserId> + '_ {
        self.user_posts
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_empty())
            .map(|(i, _)| UserId(i as u32))
    }

    /// All tag assignments on `resource` by users other than `user`, with
    /// multiplicity across posts. Empty for unseen resources and for
    /// resources only the user themself has tagged.
    pub fn resource_context(&self, resource: ResourceId, user: UserId) -> BTreeMap<TagId, u32> {
        let mut context = BTreeMap::new();
        for &i in self.resource_post_indices(resource) {
            let post = &self.posts[i];
            if post.user == user {
                continue;
            }
            for &t in post.tags() {
                *context.entry(t).or_insert(0) += 1;
            }
        }
        context
    }

    pub fn narrowness(&self) -> Result<NarrownessReport> {
        if self.resource_count == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(NarrownessReport::from_counts(
            self.post_count() as u64,
            self.resource_count as u64,
        ))
    }

    /// Canonical TSV writer: posts in stored order, tags lexicographic.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for post in &self.posts {
            let tags: Vec<&str> = post
                .tags()
                .iter()
                .map(|t| self.vocab.tags.name(t.0))
                .collect();
            // Tag ids ascend lexicographically, so id order is name order.
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                self.vocab.users.name(post.user.0),
                self.vocab.resources.name(post.resource.0),
                post.timestamp,
                tags.join(",")
            )?;
        }
        Ok(())
    }

    /// Posts as resolved (user, resource, timestamp, tags) string records,
    /// in stored order. This is the logical content used for equality.
    pub fn records(&self) -> Vec<PostRecord> {
        self.posts
            .iter()
            .map(|post| PostRecord {
                user: self.vocab.users.name(post.user.0).to_string(),
                resource: self.vocab.resources.name(post.resource.0).to_string(),
                timestamp: post.timestamp,
                tags: post
                    .tags()
                    .iter()
                    .map(|t| self.vocab.tags.name(t.0).to_string())
                    .collect(),
            })
            .collect()
    }
}

/// Logical equality: same post sequence by names, timestamps and tag sets.
/// Two folksonomies can be equal while holding different (shared vs
/// compacted) vocabulary tables.
impl PartialEq for Folksonomy {
    fn eq(&self, other: &Folksonomy) -> bool {
        self.records() == other.records()
    }
}

/// Parses the TSV dataset format. Errors carry 1-based line numbers.
pub fn parse_posts<R: BufRead>(reader: R) -> Result<Folksonomy> {
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected 4 TAB-separated fields, found {}", fields.len()),
            ));
        }
        let timestamp: i64 = fields[2].trim().parse().map_err(|_| {
            Error::parse(lineno, format!("invalid timestamp `{}`", fields[2]))
        })?;
        if timestamp < 0 {
            return Err(Error::parse(
                lineno,
                format!("negative timestamp {timestamp}"),
            ));
        }
        let mut tags: Vec<String> = fields[3]
            .split(',')
            .map(|t| t.trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        tags.sort_unstable();
        tags.dedup();
        if tags.is_empty() {
            return Err(Error::parse(lineno, "empty tag list"));
        }
        let user = fields[0].trim();
        let resource = fields[1].trim();
        if user.is_empty() || resource.is_empty() {
            return Err(Error::parse(lineno, "empty user or resource field"));
        }
        records.push(PostRecord {
            user: user.to_string(),
            resource: resource.to_string(),
            timestamp,
            tags,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Folksonomy::from_records(records)
}

/// Folksonomy class by average posts per resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NarrownessClass {
    Narrow,
    Mixed,
    Broad,
}

impl NarrownessClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NarrownessClass::Narrow => "narrow",
            NarrownessClass::Mixed => "mixed",
            NarrownessClass::Broad => "broad",
        }
    }
}

/// Degree of narrowness: |P| / |R| plus its class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NarrownessReport {
    pub posts: u64,
    pub resources: u64,
    pub posts_per_resource: f64,
    pub class: NarrownessClass,
}

impl NarrownessReport {
    /// Narrow when |P|/|R| <= 1.05, broad when >= 2.0, mixed in between.
    pub fn from_counts(posts: u64, resources: u64) -> NarrownessReport {
        assert!(resources > 0, "narrowness needs at least one resource");
        let ratio = posts as f64 / resources as f64;
        let class = if ratio <= 1.05 {
            NarrownessClass::Narrow
        } else if ratio >= 2.0 {
            NarrownessClass::Broad
        } else {
            NarrownessClass::Mixed
        };
        NarrownessReport {
            posts,
            resources,
            posts_per_resource: ratio,
            class,
        }
    }

    /// Ratio truncated (not rounded) to three decimals, computed in integer
    /// arithmetic. This is the conventional rendering for dataset tables.
    pub fn ratio_truncated(&self) -> String {
        let millis = self.posts.saturating_mul(1000) / self.resources;
        format!("{}.{:03}", millis / 1000, millis % 1000)
    }
}
