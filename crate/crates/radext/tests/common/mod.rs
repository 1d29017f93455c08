#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::Rng;
use radext_core::tagscheme::{entities_to_tags, Tag};
use radext_core::{EntityKind, FeatureVocabulary, LinearScorerParams, Model, Sentence, TagSequence};

pub const OPACITY_TEXT: &str = "右上肺见多发斑片状密影较前减少。";
pub const OPACITY_TAGS: &str = "B-P I-P I-P O B-D I-D B-Abn I-Abn I-Abn I-Abn I-Abn O O O O O";
pub const OCCLUSION_TEXT: &str = "右上肺支气管部分闭塞。";
pub const OCCLUSION_TAGS: &str = "B-P I-P I-P B-P I-P I-P B-D I-D B-Abn I-Abn O";

pub fn tagged(id: &str, text: &str, tags: &str) -> (Sentence, TagSequence) {
    let s = Sentence::from_text(id, text).unwrap();
    let t = TagSequence::new(id, tags.split(' ').map(|l| l.parse::<Tag>().unwrap()).collect());
    assert_eq!(s.len(), t.len());
    (s, t)
}

/// Model that tags each known character with its gold tag: a single
/// `c0=<char>` feature per character and zero transitions.
pub fn lookup_model(corpus: &[(Sentence, TagSequence)]) -> Model {
    let mut names = vec![radext_core::encoder::UNK_FEATURE.to_string()];
    let mut rows: Vec<(usize, Tag)> = Vec::new();
    for (s, t) in corpus {
        for (c, &tag) in s.chars().iter().zip(&t.tags) {
            let name = format!("c0={c}");
            let idx = match names.iter().position(|n| *n == name) {
                Some(i) => i,
                None => {
                    names.push(name);
                    names.len() - 1
                }
            };
            rows.push((idx, tag));
        }
    }
    let vocab = FeatureVocabulary::from_names(names).unwrap();
    let mut weights = LinearScorerParams::zeros(vocab.len());
    for (idx, tag) in rows {
        weights.set(idx, tag.index(), 10.0);
    }
    Model {
        vocab,
        weights,
        transitions: radext_core::TransitionMatrix::zeros(),
    }
}

const PRIMARY: [&str; 3] = ["右上肺", "左下叶", "纵隔"];
pub const SECONDARY: [&str; 2] = ["支气管", "胸膜"];
const DEGREE: [&str; 4] = ["多发", "少许", "部分", "轻度"];
const SIGN: [&str; 5] = ["斑片状密影", "结节", "闭塞", "增厚", "渗出"];
const FILLER: [char; 4] = ['见', '可', '另', '示'];

/// Templated sentences whose tags are determined by their characters.
pub fn toy_corpus<R: Rng>(rng: &mut R, count: usize, prefix: &str) -> Vec<(Sentence, TagSequence)> {
    let pick = |rng: &mut R, xs: &[&'static str]| xs[rng.random_range(0..xs.len())];
    (0..count)
        .map(|k| {
            let mut chars: Vec<char> = Vec::new();
            let mut spans = Vec::new();
            let mut push = |chars: &mut Vec<char>, kind, text: &str| {
                let start = chars.len();
                chars.extend(text.chars());
                spans.push((kind, start, chars.len()));
            };
            for c in 0..rng.random_range(1..=2) {
                if c > 0 {
                    chars.push('，');
                }
                push(&mut chars, EntityKind::P, pick(rng, &PRIMARY));
                if rng.random_bool(0.4) {
                    push(&mut chars, EntityKind::P, pick(rng, &SECONDARY));
                }
                if rng.random_bool(0.6) {
                    chars.push(FILLER[rng.random_range(0..FILLER.len())]);
                }
                if rng.random_bool(0.7) {
                    push(&mut chars, EntityKind::D, pick(rng, &DEGREE));
                }
                push(&mut chars, EntityKind::Abn, pick(rng, &SIGN));
            }
            chars.push('。');
            let s = Sentence::new(format!("{prefix}{k}"), chars).unwrap();
            let ents: Vec<_> = spans.iter().map(|&(kd, a, b)| s.entity(kd, a, b).unwrap()).collect();
            let t = entities_to_tags(&s, &ents).unwrap();
            (s, t)
        })
        .collect()
}

pub fn radext(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radext"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RADEXT_DICT")
        .output()
        .expect("run radext")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
