//! Sparse symmetric tag co-occurrence counts over training posts.

use std::collections::HashMap;

use crate::folksonomy::Folksonomy;
use crate::ids::TagId;

/// Symmetric sparse matrix: (a, b) -> number of posts assigning both tags.
/// The diagonal is not stored; stored counts are >= 1.
#[derive(Debug, Clone, Default)]
pub struct CoocMatrix {
    pairs: HashMap<(TagId, TagId), u32>,
    rows: HashMap<TagId, Vec<(TagId, u32)>>,
}

impl CoocMatrix {
    pub fn count(&self, a: TagId, b: TagId) -> u32 {
        if a == b {
            return 0;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.pairs.get(&key).copied().unwrap_or(0)
    }

    /// Neighbors of `tag` with their counts, ascending by tag id.
    pub fn row(&self, tag: TagId) -> &[(TagId, u32)] {
        self.rows.get(&tag).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of stored unordered pairs.
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }
}

/// Counts, for every train post with tag set S, each unordered pair of
/// distinct tags in S once.
pub fn build_cooccurrence(train: &Folksonomy) -> CoocMatrix {
    let mut pairs: HashMap<(TagId, TagId), u32> = HashMap::new();
    for post in train.posts() {
        let tags = post.tags();
        for i in 0..tags.len() {
            for j in (i + 1)..tags.len() {
                // Post tags are sorted, so (tags[i], tags[j]) is canonical.
                *pairs.entry((tags[i], tags[j])).or_insert(0) += 1;
            }
        }
    }
    let mut rows: HashMap<TagId, Vec<(TagId, u32)>> = HashMap::new();
    for (&(a, b), &n) in &pairs {
        rows.entry(a).or_default().push((b, n));
        rows.entry(b).or_default().push((a, n));
    }
    for row in rows.values_mut() {
        row.sort_unstable_by_key(|&(t, _)| t);
    }
    CoocMatrix { pairs, rows }
}
