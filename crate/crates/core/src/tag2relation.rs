//! Attribute-to-sign matching over decoded entities.
//!
//! Body parts absent from the secondary-part dictionary are primary parts.
//! Each primary part opens a chunk that runs until the next primary part; a
//! non-empty prefix before the first primary part forms an unheaded chunk.
//! Inside a chunk:
//!
//! - the primary part attaches (`P2Abn`) to every sign in the chunk;
//! - each secondary part and each degree attaches (`P2Abn` / `D2Abn`) to the
//!   single nearest sign, ties going to the later sign;
//! - each secondary part points (`P2P`) at the chunk's primary part.
//!
//! Nothing crosses a chunk boundary.

use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{Entity, EntityKind, Quadruple, Relation, RelationKind, SecondaryPartDictionary, Sentence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub primary: Option<Entity>,
    /// Entities starting inside `[start, end)`, sorted; includes `primary`.
    pub members: Vec<Entity>,
}

impl Chunk {
    pub fn contains(&self, e: &Entity) -> bool {
        self.start <= e.start && e.start < self.end
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchOutput {
    pub relations: Vec<Relation>,
    pub quadruples: Vec<Quadruple>,
}

/// Body-part entities whose text is not a dictionary term, sorted by start.
pub fn find_primary_parts(entities: &[Entity], dict: &SecondaryPartDictionary) -> Vec<Entity> {
    let mut out: Vec<Entity> = entities
        .iter()
        .filter(|e| e.kind == EntityKind::P && !dict.contains(&e.text))
        .cloned()
        .collect();
    out.sort();
    out
}

/// Splits `[0, n)` at each primary part's start. `members` holds only the
/// primary; use [`assign_members`] to distribute the other entities.
pub fn chunk_sentence(sentence: &Sentence, primaries: &[Entity]) -> Vec<Chunk> {
    let n = sentence.len();
    let mut chunks = Vec::with_capacity(primaries.len() + 1);
    let first = primaries.first().map_or(n, |p| p.start);
    if first > 0 {
        chunks.push(Chunk {
            index: 0,
            start: 0,
            end: first,
            primary: None,
            members: Vec::new(),
        });
    }
    for (k, p) in primaries.iter().enumerate() {
        let end = primaries.get(k + 1).map_or(n, |next| next.start);
        chunks.push(Chunk {
            index: chunks.len(),
            start: p.start,
            end,
            primary: Some(p.clone()),
            members: vec![p.clone()],
        });
    }
    chunks
}

/// Places every non-primary entity into the chunk containing its start.
pub fn assign_members(chunks: &mut [Chunk], entities: &[Entity]) {
    for e in entities {
        if let Some(c) = chunks.iter_mut().find(|c| c.contains(e)) {
            if c.primary.as_ref() != Some(e) {
                c.members.push(e.clone());
            }
        }
    }
    for c in chunks {
        c.members.sort();
    }
}

fn nearest_sign<'a>(attr: &Entity, signs: &[&'a Entity]) -> Option<&'a Entity> {
    let mut best: Option<(&Entity, usize)> = None;
    // `signs` is sorted by start, so `<=` hands ties to the later sign.
    for &s in signs {
        let d = attr.distance(s);
        if best.is_none_or(|(_, bd)| d <= bd) {
            best = Some((s, d));
        }
    }
    best.map(|(s, _)| s)
}

/// Relations and quadruples for one sentence.
///
/// The result does not depend on the order of `entities`. Relations are
/// sorted by `(head, tail, kind)`; quadruples by sign, then secondary part,
/// then degree.
pub fn match_relations(
    sentence: &Sentence,
    entities: &[Entity],
    dict: &SecondaryPartDictionary,
) -> MatchOutput {
    let mut sorted = entities.to_vec();
    sorted.sort();
    sorted.dedup();
    let primaries = find_primary_parts(&sorted, dict);
    let mut chunks = chunk_sentence(sentence, &primaries);
    assign_members(&mut chunks, &sorted);

    let mut relations = Vec::new();
    let mut quadruples = Vec::new();
    for chunk in &chunks {
        let signs: Vec<&Entity> = chunk.members.iter().filter(|e| e.kind == EntityKind::Abn).collect();
        let secondaries: Vec<&Entity> = chunk
            .members
            .iter()
            .filter(|e| e.kind == EntityKind::P && chunk.primary.as_ref() != Some(*e))
            .collect();
        let degrees: Vec<&Entity> = chunk.members.iter().filter(|e| e.kind == EntityKind::D).collect();

        // (sign index, attribute) pairs surviving the nearest-sign filter
        let mut sp_links: Vec<(usize, &Entity)> = Vec::new();
        let mut d_links: Vec<(usize, &Entity)> = Vec::new();
        for &sp in &secondaries {
            if let Some(sign) = nearest_sign(sp, &signs) {
                let idx = signs.iter().position(|s| *s == sign).unwrap_or_default();
                sp_links.push((idx, sp));
                relations.push(Relation {
                    kind: RelationKind::P2Abn,
                    head: sp.clone(),
                    tail: sign.clone(),
                });
            }
            if let Some(pp) = &chunk.primary {
                relations.push(Relation {
                    kind: RelationKind::P2P,
                    head: sp.clone(),
                    tail: pp.clone(),
                });
            }
        }
        for &d in &degrees {
            if let Some(sign) = nearest_sign(d, &signs) {
                let idx = signs.iter().position(|s| *s == sign).unwrap_or_default();
                d_links.push((idx, d));
                relations.push(Relation {
                    kind: RelationKind::D2Abn,
                    head: d.clone(),
                    tail: sign.clone(),
                });
            }
        }
        for (idx, &sign) in signs.iter().enumerate() {
            if let Some(pp) = &chunk.primary {
                relations.push(Relation {
                    kind: RelationKind::P2Abn,
                    head: pp.clone(),
                    tail: sign.clone(),
                });
            }
            let sps: Vec<Option<&Entity>> = attached(&sp_links, idx);
            let ds: Vec<Option<&Entity>> = attached(&d_links, idx);
            for sp in &sps {
                for d in &ds {
                    quadruples.push(Quadruple {
                        pp: chunk.primary.clone(),
                        sp: sp.cloned(),
                        d: d.cloned(),
                        abn: sign.clone(),
                    });
                }
            }
        }
    }
    relations.sort_by(|a, b| {
        (&a.head, &a.tail, a.kind).cmp(&(&b.head, &b.tail, b.kind))
    });
    MatchOutput {
        relations,
        quadruples,
    }
}

fn attached<'a>(links: &[(usize, &'a Entity)], sign: usize) -> Vec<Option<&'a Entity>> {
    let v: Vec<Option<&Entity>> = links
        .iter()
        .filter(|(i, _)| *i == sign)
        .map(|(_, e)| Some(*e))
        .collect();
    if v.is_empty() {
        vec![None]
    } else {
        v
    }
}
