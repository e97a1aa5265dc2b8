//! Label vocabularies and fixed-width label bitmasks.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Maximum number of labels a vocabulary may hold.
pub const MAX_LABELS: usize = 1024;

const WORDS: usize = MAX_LABELS / 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("label at position {0} has an empty name")]
    EmptyName(usize),
    #[error("duplicate label name {0:?}")]
    DuplicateName(String),
    #[error("vocabulary of {0} labels exceeds the capacity of {MAX_LABELS}")]
    CapacityExceeded(usize),
    #[error("label id {0} out of range")]
    IdOutOfRange(usize),
}

/// Ordered list of label names. The id of a label is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelVocabulary {
    pub fn new<I, S>(names: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(LabelError::EmptyVocabulary);
        }
        if names.len() > MAX_LABELS {
            return Err(LabelError::CapacityExceeded(names.len()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (pos, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(LabelError::EmptyName(pos));
            }
            if index.insert(name.clone(), pos).is_some() {
                return Err(LabelError::DuplicateName(name.clone()));
            }
        }
        Ok(Self { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Set containing every label of the vocabulary.
    pub fn full_set(&self) -> LabelSet {
        LabelSet::from_ids(0..self.len()).expect("vocabulary size is bounded by MAX_LABELS")
    }

    /// Renders a label set with names, falling back to `#id` for unknown ids.
    pub fn describe(&self, set: &LabelSet) -> String {
        let parts: Vec<String> = set
            .iter()
            .map(|id| self.name(id).map_or_else(|| format!("#{id}"), str::to_owned))
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// A set of label ids stored as a fixed-width bitmask.
///
/// Ordering is by cardinality first, then by the ascending id tuple compared
/// lexicographically, so `{2} < {0,1} < {0,2} < {1,2} < {0,1,2}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelSet {
    words: [u64; WORDS],
}

impl Default for LabelSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl LabelSet {
    pub const fn empty() -> Self {
        Self { words: [0; WORDS] }
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Result<Self, LabelError> {
        let mut set = Self::empty();
        for id in ids {
            set.try_insert(id)?;
        }
        Ok(set)
    }

    pub fn try_insert(&mut self, id: usize) -> Result<bool, LabelError> {
        if id >= MAX_LABELS {
            return Err(LabelError::IdOutOfRange(id));
        }
        let (w, b) = (id / 64, id % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        Ok(fresh)
    }

    /// Inserts `id`.
    ///
    /// # Panics
    ///
    /// Panics if `id >= MAX_LABELS`.
    pub fn insert(&mut self, id: usize) -> bool {
        self.try_insert(id).expect("label id within capacity")
    }

    pub fn remove(&mut self, id: usize) -> bool {
        if id >= MAX_LABELS {
            return false;
        }
        let (w, b) = (id / 64, id % 64);
        let present = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        present
    }

    pub fn contains(&self, id: usize) -> bool {
        id < MAX_LABELS && self.words[id / 64] & (1 << (id % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        out
    }

    /// Largest id in the set plus one, or zero for the empty set.
    pub fn bound(&self) -> usize {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map_or(0, |(i, w)| i * 64 + 64 - w.leading_zeros() as usize)
    }

    /// Ascending iterator over member ids.
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word_idx: 0,
            current: self.words[0],
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Compares ascending id tuples lexicographically, ignoring cardinality.
    pub fn cmp_lex(&self, other: &Self) -> Ordering {
        let mut a = self.iter();
        let mut b = other.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) if x != y => return x.cmp(&y),
                _ => {}
            }
        }
    }
}

impl Ord for LabelSet {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.len().cmp(&other.len()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Same cardinality: the set holding the lowest id of the symmetric
        // difference has the smaller tuple.
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let low = diff & diff.wrapping_neg();
                return if a & low != 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for LabelSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for LabelSet {
    /// # Panics
    ///
    /// Panics if any id is `>= MAX_LABELS`.
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_ids(iter).expect("label id within capacity")
    }
}

impl<'a> IntoIterator for &'a LabelSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

pub struct Iter<'a> {
    words: &'a [u64; WORDS],
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * 64 + bit);
            }
            self.word_idx += 1;
            if self.word_idx >= WORDS {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}
