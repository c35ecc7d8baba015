//! Interned identifiers for the three folksonomy entity kinds.
//!
//! Vocabularies assign ids in lexicographic order of the underlying strings,
//! so id-ascending iteration is deterministic and equals lexicographic
//! iteration. Tie-breaking "by tag id" downstream is therefore tie-breaking
//! by tag name.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResourceId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagId(pub u32);

/// Immutable name table. Ids are dense indices into a sorted name list.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Builds a vocabulary from arbitrary names; duplicates collapse and ids
    /// follow lexicographic order.
    pub fn from_names<I, S>(names: I) -> Vocab
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort_unstable();
        names.dedup();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Vocab { names, index }
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// The three vocabularies of a folksonomy, shared between a dataset and the
/// splits derived from it.
#[derive(Debug, Clone, Default)]
pub struct Vocabularies {
    pub users: Vocab,
    pub resources: Vocab,
    pub tags: Vocab,
}
