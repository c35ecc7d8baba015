//! Chronological leave-newest-post-out split.
//!
//! For every user with n >= 2 posts, the most recent post goes to the test
//! set and the remaining n-1 posts stay in training. Users with a single
//! post stay entirely in training and produce no test query. Timestamp ties
//! resolve to the last-read post among the tied maxima.

use std::sync::Arc;

use crate::folksonomy::{Folksonomy, Post};
use crate::ids::UserId;

/// Per-user train/test partition preserving temporal order. The train
/// folksonomy shares the parent's vocabulary so ids stay comparable across
/// the split.
#[derive(Debug, Clone)]
pub struct ChronoSplit {
    pub train: Arc<Folksonomy>,
    /// One post per test user, ordered by user id. The post's own timestamp
    /// is the evaluation reference time.
    pub test: Vec<Post>,
}

pub fn chronological_split(f: &Folksonomy) -> ChronoSplit {
    let mut test_post_idx = vec![false; f.post_count()];
    let mut test = Vec::new();
    for user in f.users_with_posts() {
        let idx = f.user_post_indices(user);
        if idx.len() >= 2 {
            let last = *idx.last().unwrap();
            test_post_idx[last] = true;
            test.push(f.posts()[last].clone());
        }
    }
    test.sort_by_key(|p| p.user);
    let train_posts: Vec<Post> = f
        .posts()
        .iter()
        .enumerate()
        .filter(|(i, _)| !test_post_idx[*i])
        .map(|(_, p)| p.clone())
        .collect();
    let train = Arc::new(Folksonomy::from_parts(f.vocab().clone(), train_posts));
    ChronoSplit { train, test }
}

impl ChronoSplit {
    pub fn test_users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.test.iter().map(|p| p.user)
    }

    /// FNV-1a digest over the split content, used to assert that two
    /// commands ran on byte-identical splits.
    pub fn split_hash(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        eat(&(self.train.post_count() as u64).to_le_bytes());
        let vocab = self.train.vocab();
        for post in &self.test {
            eat(vocab.users.name(post.user.0).as_bytes());
            eat(&[0x1f]);
            eat(vocab.resources.name(post.resource.0).as_bytes());
            eat(&[0x1f]);
            eat(&post.timestamp.to_le_bytes());
            for t in post.tags() {
                eat(vocab.tags.name(t.0).as_bytes());
                eat(&[0x1e]);
            }
            eat(&[0x1d]);
        }
        format!("{h:016x}")
    }
}
