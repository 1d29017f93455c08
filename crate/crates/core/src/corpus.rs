//! Sentence, entity, relation and dictionary data model.
//!
//! All offsets are indices into the sentence's Unicode scalar values, never
//! byte offsets.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::tagscheme::NUM_TAGS;

/// One report sentence as a sequence of characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    chars: Vec<char>,
    pub source_report_id: Option<String>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, chars: Vec<char>) -> Result<Self> {
        let id = id.into();
        if chars.is_empty() {
            return Err(Error::EmptySentence(id));
        }
        Ok(Self {
            id,
            chars,
            source_report_id: None,
        })
    }

    pub fn from_text(id: impl Into<String>, text: &str) -> Result<Self> {
        Self::new(id, text.chars().collect())
    }

    pub fn with_source(mut self, report_id: impl Into<String>) -> Self {
        self.source_report_id = Some(report_id.into());
        self
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    /// Always false: a sentence holds at least one character.
    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Substring over the character range `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> String {
        self.chars[start..end].iter().collect()
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }

    /// Builds an entity over `[start, end)` with its text taken from the sentence.
    pub fn entity(&self, kind: EntityKind, start: usize, end: usize) -> Result<Entity> {
        if start >= end || end > self.len() {
            return Err(Error::SpanOutOfBounds {
                start,
                end,
                len: self.len(),
            });
        }
        Ok(Entity {
            kind,
            start,
            end,
            text: self.slice(start, end),
        })
    }
}

/// Semantic role of an entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EntityKind {
    /// Body part.
    P,
    /// Degree.
    D,
    /// Abnormal imaging sign.
    Abn,
}

impl EntityKind {
    pub const ALL: [EntityKind; 3] = [EntityKind::P, EntityKind::D, EntityKind::Abn];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::P => "P",
            EntityKind::D => "D",
            EntityKind::Abn => "Abn",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Typed character span `[start, end)` within a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Entity {
    pub kind: EntityKind,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl Entity {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Entity) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn overlap_len(&self, other: &Entity) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }

    pub fn same_span(&self, other: &Entity) -> bool {
        self.start == other.start && self.end == other.end
    }

    /// Gap in characters between the closest ends of two spans; 0 when they
    /// touch or overlap.
    pub fn distance(&self, other: &Entity) -> usize {
        other.start.saturating_sub(self.end).max(self.start.saturating_sub(other.end))
    }

    /// Checks bounds and that `text` equals the sentence substring.
    pub fn validate(&self, sentence: &Sentence) -> Result<()> {
        if self.start >= self.end || self.end > sentence.len() {
            return Err(Error::SpanOutOfBounds {
                start: self.start,
                end: self.end,
                len: sentence.len(),
            });
        }
        if sentence.chars()[self.start..self.end]
            .iter()
            .copied()
            .ne(self.text.chars())
        {
            return Err(Error::TextMismatch {
                start: self.start,
                end: self.end,
                text: self.text.clone(),
            });
        }
        Ok(())
    }

    /// Canonical ordering key: start, then end, then kind.
    pub(crate) fn sort_key(&self) -> (usize, usize, EntityKind) {
        (self.start, self.end, self.kind)
    }
}

impl PartialOrd for Entity {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entity {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.sort_key()
            .cmp(&other.sort_key())
            .then_with(|| self.text.cmp(&other.text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RelationKind {
    P2Abn,
    D2Abn,
    P2P,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::P2Abn => "P2Abn",
            RelationKind::D2Abn => "D2Abn",
            RelationKind::P2P => "P2P",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Directed typed pair. `P2Abn` and `D2Abn` point from the attribute to the
/// sign; `P2P` points from a secondary part to its primary part.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Relation {
    pub kind: RelationKind,
    pub head: Entity,
    pub tail: Entity,
}

impl Relation {
    pub fn new(kind: RelationKind, head: Entity, tail: Entity) -> Result<Self> {
        let ok = match kind {
            RelationKind::P2Abn => head.kind == EntityKind::P && tail.kind == EntityKind::Abn,
            RelationKind::D2Abn => head.kind == EntityKind::D && tail.kind == EntityKind::Abn,
            RelationKind::P2P => {
                head.kind == EntityKind::P && tail.kind == EntityKind::P && head != tail
            }
        };
        if !ok {
            return Err(Error::InvalidRelation(match kind {
                RelationKind::P2Abn => "P2Abn requires a P head and an Abn tail",
                RelationKind::D2Abn => "D2Abn requires a D head and an Abn tail",
                RelationKind::P2P => "P2P requires two distinct P entities",
            }));
        }
        Ok(Self { kind, head, tail })
    }
}

/// `{PP, SP, D, Abn}` record; every attribute may be null.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quadruple {
    pub pp: Option<Entity>,
    pub sp: Option<Entity>,
    pub d: Option<Entity>,
    pub abn: Entity,
}

/// Set of secondary body-part terms, stored NFC-normalized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SecondaryPartDictionary {
    terms: BTreeSet<String>,
}

impl SecondaryPartDictionary {
    /// Builds a dictionary from raw terms; rejects empty terms and an empty
    /// resulting set.
    pub fn new<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for term in terms {
            let term = term.as_ref();
            if term.is_empty() {
                return Err(Error::EmptyTerm);
            }
            set.insert(nfc(term));
        }
        if set.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        Ok(Self { terms: set })
    }

    /// A dictionary with no terms; every body part is then primary.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, text: &str) -> bool {
        self.terms.contains(&nfc(text))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// `n × 7` emission scores for one sentence, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix {
    pub sentence_id: String,
    rows: usize,
    scores: Vec<f64>,
}

impl EmissionMatrix {
    /// Validates shape and finiteness.
    pub fn new(sentence_id: impl Into<String>, rows: usize, scores: Vec<f64>) -> Result<Self> {
        let sentence_id = sentence_id.into();
        if rows == 0 {
            return Err(Error::EmptySentence(sentence_id));
        }
        if scores.len() != rows * NUM_TAGS {
            return Err(Error::DimensionMismatch {
                expected: rows * NUM_TAGS,
                found: scores.len(),
            });
        }
        if let Some(pos) = scores.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / NUM_TAGS,
                col: pos % NUM_TAGS,
            });
        }
        Ok(Self {
            sentence_id,
            rows,
            scores,
        })
    }

    pub fn from_rows(sentence_id: impl Into<String>, rows: &[[f64; NUM_TAGS]]) -> Result<Self> {
        Self::new(sentence_id, rows.len(), rows.iter().flatten().copied().collect())
    }

    pub fn zeros(sentence_id: impl Into<String>, rows: usize) -> Result<Self> {
        Self::new(sentence_id, rows, alloc::vec![0.0; rows * NUM_TAGS])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * NUM_TAGS..(i + 1) * NUM_TAGS]
    }

    pub fn get(&self, i: usize, tag: usize) -> f64 {
        self.scores[i * NUM_TAGS + tag]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    /// Mutable access for gradient checks and tests. Callers must keep the
    /// values finite.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.scores
    }
}
