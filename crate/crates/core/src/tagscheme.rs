//! The seven-tag BIO scheme over `P`, `D` and `Abn`, and conversions between
//! tag paths and entity spans.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::corpus::{Entity, EntityKind, Sentence};
use crate::error::{Error, Result};

/// Number of tags, `k`.
pub const NUM_TAGS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Tag {
    O = 0,
    BP = 1,
    IP = 2,
    BD = 3,
    ID = 4,
    BAbn = 5,
    IAbn = 6,
}

impl Tag {
    pub const ALL: [Tag; NUM_TAGS] = [
        Tag::O,
        Tag::BP,
        Tag::IP,
        Tag::BD,
        Tag::ID,
        Tag::BAbn,
        Tag::IAbn,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Tag> {
        Tag::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Tag::O => "O",
            Tag::BP => "B-P",
            Tag::IP => "I-P",
            Tag::BD => "B-D",
            Tag::ID => "I-D",
            Tag::BAbn => "B-Abn",
            Tag::IAbn => "I-Abn",
        }
    }

    pub fn begin(kind: EntityKind) -> Tag {
        match kind {
            EntityKind::P => Tag::BP,
            EntityKind::D => Tag::BD,
            EntityKind::Abn => Tag::BAbn,
        }
    }

    pub fn inside(kind: EntityKind) -> Tag {
        match kind {
            EntityKind::P => Tag::IP,
            EntityKind::D => Tag::ID,
            EntityKind::Abn => Tag::IAbn,
        }
    }

    pub fn kind(self) -> Option<EntityKind> {
        match self {
            Tag::O => None,
            Tag::BP | Tag::IP => Some(EntityKind::P),
            Tag::BD | Tag::ID => Some(EntityKind::D),
            Tag::BAbn | Tag::IAbn => Some(EntityKind::Abn),
        }
    }

    pub fn is_inside(self) -> bool {
        matches!(self, Tag::IP | Tag::ID | Tag::IAbn)
    }

    /// Whether `self` may directly follow `prev` in a well-formed BIO path.
    /// `prev == None` means sentence start.
    pub fn may_follow(self, prev: Option<Tag>) -> bool {
        if !self.is_inside() {
            return true;
        }
        matches!(prev, Some(p) if p != Tag::O && p.kind() == self.kind())
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tag::ALL
            .iter()
            .copied()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

/// Per-character label path for one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSequence {
    pub sentence_id: alloc::string::String,
    pub tags: Vec<Tag>,
}

impl TagSequence {
    pub fn new(sentence_id: impl Into<alloc::string::String>, tags: Vec<Tag>) -> Self {
        Self {
            sentence_id: sentence_id.into(),
            tags,
        }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// Encodes non-overlapping entities as a BIO path.
pub fn entities_to_tags(sentence: &Sentence, entities: &[Entity]) -> Result<TagSequence> {
    let mut tags = alloc::vec![Tag::O; sentence.len()];
    let mut sorted: Vec<&Entity> = entities.iter().collect();
    sorted.sort();
    for e in &sorted {
        if e.start >= e.end || e.end > sentence.len() {
            return Err(Error::SpanOutOfBounds {
                start: e.start,
                end: e.end,
                len: sentence.len(),
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(Error::Overlap(
                pair[0].start,
                pair[0].end,
                pair[1].start,
                pair[1].end,
            ));
        }
    }
    for e in sorted {
        tags[e.start] = Tag::begin(e.kind);
        for t in &mut tags[e.start + 1..e.end] {
            *t = Tag::inside(e.kind);
        }
    }
    Ok(TagSequence::new(sentence.id.clone(), tags))
}

/// Decodes a tag path into entities, sorted by start.
///
/// Any tag path is accepted. An `I-X` that does not continue an open `X`
/// entity opens a new one, as does a change of kind inside a run.
pub fn tags_to_entities(sentence: &Sentence, tags: &TagSequence) -> Vec<Entity> {
    let mut out = Vec::new();
    let mut open: Option<(EntityKind, usize)> = None;
    let n = tags.len().min(sentence.len());
    let close = |open: &mut Option<(EntityKind, usize)>, end: usize, out: &mut Vec<Entity>| {
        if let Some((kind, start)) = open.take() {
            out.push(Entity {
                kind,
                start,
                end,
                text: sentence.slice(start, end),
            });
        }
    };
    for (i, &tag) in tags.tags[..n].iter().enumerate() {
        match tag.kind() {
            None => close(&mut open, i, &mut out),
            Some(kind) => {
                let continues = tag.is_inside() && matches!(open, Some((k, _)) if k == kind);
                if !continues {
                    close(&mut open, i, &mut out);
                    open = Some((kind, i));
                }
            }
        }
    }
    close(&mut open, n, &mut out);
    out
}

/// Indices where an `I-X` tag follows neither `B-X` nor `I-X`.
pub fn validate_path(tags: &TagSequence) -> Vec<usize> {
    let mut prev = None;
    let mut violations = Vec::new();
    for (i, &tag) in tags.tags.iter().enumerate() {
        if !tag.may_follow(prev) {
            violations.push(i);
        }
        prev = Some(tag);
    }
    violations
}
