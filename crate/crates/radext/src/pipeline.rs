//! Corpus-level tagging and extraction, optionally parallel per sentence.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use radext_core::eval::AnnotatedSentence;
use radext_core::tag2relation::{match_relations, MatchOutput};
use radext_core::tagscheme::{tags_to_entities, TagSequence};
use radext_core::{encoder, EmissionMatrix, Model, SecondaryPartDictionary, Sentence};

use crate::error::{Error, Result};

/// Runs `f` over `items` on `jobs` threads (0 = rayon default), keeping
/// input order.
pub fn par_map<T, U, F>(items: &[T], jobs: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    if jobs == 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}

/// Pairs each sentence with its external emission block by id.
pub fn align_emissions(
    sentences: &[Sentence],
    blocks: Vec<EmissionMatrix>,
    path: &Path,
) -> Result<Vec<EmissionMatrix>> {
    let mut by_id: HashMap<String, EmissionMatrix> = HashMap::new();
    for b in blocks {
        let id = b.sentence_id.clone();
        if by_id.insert(id.clone(), b).is_some() {
            return Err(Error::Model {
                path: path.into(),
                message: format!("duplicate emission block for sentence `{id}`"),
            });
        }
    }
    sentences
        .iter()
        .map(|s| {
            let m = by_id.remove(&s.id).ok_or_else(|| Error::Model {
                path: path.into(),
                message: format!("no emission block for sentence `{}`", s.id),
            })?;
            encoder::external_emissions(s, m).map_err(|source| Error::Invalid {
                path: path.into(),
                source,
            })
        })
        .collect()
}

/// Decodes every sentence, from the model's features or from `external`
/// (already aligned with `sentences`).
pub fn tag_sentences(
    model: &Model,
    sentences: &[Sentence],
    external: Option<&[EmissionMatrix]>,
    constrain_bio: bool,
    jobs: usize,
) -> Result<Vec<TagSequence>> {
    match external {
        Some(blocks) => Ok(par_map(blocks, jobs, |e| model.tag_emissions(e, constrain_bio))),
        None => par_map(sentences, jobs, |s| model.tag(s, constrain_bio))
            .into_iter()
            .map(|r| r.map_err(Error::from))
            .collect(),
    }
}

/// Entities and relations for each tagged sentence.
pub fn extract(
    corpus: &[(Sentence, TagSequence)],
    dict: &SecondaryPartDictionary,
    jobs: usize,
) -> Vec<MatchOutput> {
    par_map(corpus, jobs, |(s, tags)| {
        match_relations(s, &tags_to_entities(s, tags), dict)
    })
}

/// Evaluation view of a tagged corpus; relations only when `dict` is given.
pub fn annotate(
    corpus: &[(Sentence, TagSequence)],
    dict: Option<&SecondaryPartDictionary>,
) -> Vec<AnnotatedSentence> {
    corpus
        .iter()
        .map(|(s, tags)| {
            let entities = tags_to_entities(s, tags);
            let relations = dict
                .map(|d| match_relations(s, &entities, d).relations)
                .unwrap_or_default();
            AnnotatedSentence::new(s.id.clone(), entities, relations)
        })
        .collect()
}

/// Checks that two corpora list the same sentences in the same order.
pub fn check_aligned(
    pred: &[(Sentence, TagSequence)],
    gold: &[(Sentence, TagSequence)],
    pred_path: &Path,
    gold_path: &Path,
) -> Result<()> {
    let mismatch = |message: String| Error::SentenceMismatch {
        left: pred_path.into(),
        right: gold_path.into(),
        message,
    };
    if pred.len() != gold.len() {
        return Err(mismatch(format!("{} vs {} sentences", pred.len(), gold.len())));
    }
    for (i, ((p, _), (g, _))) in pred.iter().zip(gold).enumerate() {
        if p.id != g.id {
            return Err(mismatch(format!("sentence {} has id `{}` vs `{}`", i + 1, p.id, g.id)));
        }
        if p.chars() != g.chars() {
            return Err(mismatch(format!("sentence `{}` has different text", p.id)));
        }
    }
    Ok(())
}
