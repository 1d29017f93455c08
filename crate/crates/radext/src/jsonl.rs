//! JSON-lines outputs of the extraction pipeline.

use std::fs;
use std::path::Path;

use radext_core::{Entity, Quadruple, Relation, RelationKind};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleRecord {
    pub sentence_id: String,
    pub pp: Option<Entity>,
    pub sp: Option<Entity>,
    pub d: Option<Entity>,
    pub abn: Entity,
}

impl QuadrupleRecord {
    pub fn new(sentence_id: &str, q: &Quadruple) -> Self {
        Self {
            sentence_id: sentence_id.into(),
            pp: q.pp.clone(),
            sp: q.sp.clone(),
            d: q.d.clone(),
            abn: q.abn.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub sentence_id: String,
    pub kind: RelationKind,
    pub head: Entity,
    pub tail: Entity,
}

impl RelationRecord {
    pub fn new(sentence_id: &str, r: &Relation) -> Self {
        Self {
            sentence_id: sentence_id.into(),
            kind: r.kind,
            head: r.head.clone(),
            tail: r.tail.clone(),
        }
    }

    pub fn to_relation(&self) -> radext_core::Result<Relation> {
        Relation::new(self.kind, self.head.clone(), self.tail.clone())
    }
}

/// One compact JSON object per line. No records gives an empty string.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<()> {
    fs::write(path, to_jsonl(records)).map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::format(path, i + 1, e.to_string())))
        .collect()
}
