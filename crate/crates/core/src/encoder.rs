//! Emission scores for the CRF.
//!
//! Scores come either from a sparse linear scorer over fixed character
//! templates, or from an externally computed `n × 7` matrix.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{EmissionMatrix, Sentence};
use crate::error::{Error, Result};
use crate::tagscheme::NUM_TAGS;

pub const UNK_FEATURE: &str = "<UNK>";
pub const UNK_INDEX: usize = 0;
const BOS: &str = "<BOS>";
const EOS: &str = "<EOS>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharClass {
    Digit,
    Latin,
    Punct,
    Cjk,
    Other,
}

impl CharClass {
    pub fn of(c: char) -> Self {
        let u = c as u32;
        if c.is_ascii_digit() || (0xFF10..=0xFF19).contains(&u) || (c.is_numeric() && u < 0x2E80) {
            CharClass::Digit
        } else if c.is_ascii_alphabetic()
            || (0xFF21..=0xFF3A).contains(&u)
            || (0xFF41..=0xFF5A).contains(&u)
        {
            CharClass::Latin
        } else if c.is_ascii_punctuation()
            || (0x2000..=0x206F).contains(&u)
            || (0x3000..=0x303F).contains(&u)
            || (0xFF01..=0xFF0F).contains(&u)
            || (0xFF1A..=0xFF20).contains(&u)
            || (0xFF3B..=0xFF40).contains(&u)
            || (0xFF5B..=0xFF65).contains(&u)
        {
            CharClass::Punct
        } else if (0x4E00..=0x9FFF).contains(&u)
            || (0x3400..=0x4DBF).contains(&u)
            || (0xF900..=0xFAFF).contains(&u)
            || (0x20000..=0x2FFFF).contains(&u)
        {
            CharClass::Cjk
        } else {
            CharClass::Other
        }
    }

    fn name(self) -> &'static str {
        match self {
            CharClass::Digit => "digit",
            CharClass::Latin => "latin",
            CharClass::Punct => "punct",
            CharClass::Cjk => "cjk",
            CharClass::Other => "other",
        }
    }
}

fn char_at(sentence: &Sentence, pos: isize) -> Option<char> {
    if pos < 0 {
        return None;
    }
    sentence.chars().get(pos as usize).copied()
}

fn show(c: Option<char>, pos: isize) -> String {
    match c {
        Some(c) => String::from(c),
        None if pos < 0 => String::from(BOS),
        None => String::from(EOS),
    }
}

/// Feature strings active at position `i`.
///
/// Templates: unigrams at offsets -2..=2 (`c-2=`, `c-1=`, `c0=`, `c+1=`,
/// `c+2=`), bigrams `bi-1=` over `(i-1, i)` and `bi0=` over `(i, i+1)`, the
/// class of the current character, and an always-on `bias`. Positions
/// outside the sentence show as `<BOS>` / `<EOS>`.
///
/// # Panics
///
/// If `i >= sentence.len()`.
pub fn extract_features(sentence: &Sentence, i: usize) -> Vec<String> {
    assert!(i < sentence.len(), "position {i} out of range");
    let at = |off: isize| {
        let pos = i as isize + off;
        show(char_at(sentence, pos), pos)
    };
    let cur = sentence.chars()[i];
    vec![
        String::from("bias"),
        format!("c0={cur}"),
        format!("c-1={}", at(-1)),
        format!("c-2={}", at(-2)),
        format!("c+1={}", at(1)),
        format!("c+2={}", at(2)),
        format!("bi-1={}{cur}", at(-1)),
        format!("bi0={cur}{}", at(1)),
        format!("cls={}", CharClass::of(cur).name()),
    ]
}

/// Frozen map from feature string to weight-row index. Index 0 is reserved
/// for unknown features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVocabulary {
    index: BTreeMap<String, usize>,
    names: Vec<String>,
}

impl FeatureVocabulary {
    /// Collects every feature seen in `sentences`, in first-seen order.
    pub fn build<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        let mut index = BTreeMap::new();
        let mut names = vec![String::from(UNK_FEATURE)];
        index.insert(String::from(UNK_FEATURE), UNK_INDEX);
        for s in sentences {
            for i in 0..s.len() {
                for f in extract_features(s, i) {
                    if !index.contains_key(&f) {
                        index.insert(f.clone(), names.len());
                        names.push(f);
                    }
                }
            }
        }
        Self { index, names }
    }

    /// Restores a vocabulary from its names in index order. The first name
    /// must be the unknown-feature marker and names must be distinct.
    pub fn from_names(names: Vec<String>) -> Option<Self> {
        if names.first().map(String::as_str) != Some(UNK_FEATURE) {
            return None;
        }
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return None;
            }
        }
        Some(Self { index, names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Always false: the unknown-feature row is always present.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, feature: &str) -> usize {
        self.index.get(feature).copied().unwrap_or(UNK_INDEX)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Active feature indices for every position of `sentence`.
    pub fn featurize(&self, sentence: &Sentence) -> Vec<Vec<usize>> {
        (0..sentence.len())
            .map(|i| {
                extract_features(sentence, i)
                    .iter()
                    .map(|f| self.get(f))
                    .collect()
            })
            .collect()
    }
}

/// `m × 7` weight matrix, row-major; row `f` holds feature `f`'s score for
/// each tag.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScorerParams {
    weights: Vec<f64>,
}

impl LinearScorerParams {
    pub fn zeros(features: usize) -> Self {
        Self {
            weights: vec![0.0; features * NUM_TAGS],
        }
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if !weights.len().is_multiple_of(NUM_TAGS) {
            return Err(Error::DimensionMismatch {
                expected: (weights.len() / NUM_TAGS + 1) * NUM_TAGS,
                found: weights.len(),
            });
        }
        if let Some(pos) = weights.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / NUM_TAGS,
                col: pos % NUM_TAGS,
            });
        }
        Ok(Self { weights })
    }

    pub fn features(&self) -> usize {
        self.weights.len() / NUM_TAGS
    }

    pub fn get(&self, feature: usize, tag: usize) -> f64 {
        self.weights[feature * NUM_TAGS + tag]
    }

    pub fn set(&mut self, feature: usize, tag: usize, value: f64) {
        self.weights[feature * NUM_TAGS + tag] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Emission matrix from pre-computed feature indices. Fails with
    /// [`Error::NonFinite`] if a row sum overflows, and on an empty sentence.
    pub fn score_indices(&self, sentence_id: &str, active: &[Vec<usize>]) -> Result<EmissionMatrix> {
        let mut scores = vec![0.0; active.len() * NUM_TAGS];
        for (i, feats) in active.iter().enumerate() {
            let row = &mut scores[i * NUM_TAGS..(i + 1) * NUM_TAGS];
            for &f in feats {
                let w = &self.weights[f * NUM_TAGS..(f + 1) * NUM_TAGS];
                for (r, x) in row.iter_mut().zip(w) {
                    *r += x;
                }
            }
        }
        EmissionMatrix::new(sentence_id, active.len(), scores)
    }
}

/// `P[i, t] = Σ_f weight[f, t]` over the features active at `i`.
pub fn score_sentence(
    sentence: &Sentence,
    params: &LinearScorerParams,
    vocab: &FeatureVocabulary,
) -> Result<EmissionMatrix> {
    params.score_indices(&sentence.id, &vocab.featurize(sentence))
}

/// Accepts an externally computed emission matrix for `sentence` after
/// checking its id and row count.
pub fn external_emissions(sentence: &Sentence, matrix: EmissionMatrix) -> Result<EmissionMatrix> {
    if matrix.sentence_id != sentence.id {
        return Err(Error::IdMismatch {
            expected: sentence.id.clone(),
            found: matrix.sentence_id,
        });
    }
    if matrix.rows() != sentence.len() {
        return Err(Error::DimensionMismatch {
            expected: sentence.len(),
            found: matrix.rows(),
        });
    }
    Ok(matrix)
}
