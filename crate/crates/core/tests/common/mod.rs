//! Independent reference implementations used as test oracles. Nothing here
//! calls into the forward/backward, Viterbi or matching code under test.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use radext_core::corpus::{
    EmissionMatrix, Entity, EntityKind, Quadruple, Relation, RelationKind, SecondaryPartDictionary,
    Sentence,
};
use radext_core::eval::AnnotatedSentence;
use radext_core::crf::{TransitionMatrix, END, START};
use radext_core::tagscheme::{Tag, TagSequence, NUM_TAGS};

pub fn random_emissions<R: Rng>(rng: &mut R, n: usize, scale: f64) -> EmissionMatrix {
    let v: Vec<f64> = (0..n * NUM_TAGS).map(|_| rng.random_range(-scale..scale)).collect();
    EmissionMatrix::new("rand", n, v).unwrap()
}

pub fn random_transitions<R: Rng>(rng: &mut R, scale: f64) -> TransitionMatrix {
    let mut a = TransitionMatrix::zeros();
    for v in a.iter_mut() {
        *v = rng.random_range(-scale..scale);
    }
    a
}

/// Every tag path of length `n`, in lexicographic index order.
pub fn all_paths(n: usize) -> Vec<Vec<Tag>> {
    let total = NUM_TAGS.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut p = vec![Tag::O; n];
            for slot in p.iter_mut().rev() {
                *slot = Tag::ALL[code % NUM_TAGS];
                code /= NUM_TAGS;
            }
            p
        })
        .collect()
}

/// Term-by-term path score.
pub fn explicit_score(e: &EmissionMatrix, a: &TransitionMatrix, path: &[Tag]) -> f64 {
    let mut prev = START;
    let mut total = 0.0;
    for (i, t) in path.iter().enumerate() {
        total += a.0[prev][t.index()];
        total += e.row(i)[t.index()];
        prev = t.index();
    }
    total + a.0[prev][END]
}

/// `log Σ exp(score)` over all paths, by enumeration.
pub fn brute_log_partition(e: &EmissionMatrix, a: &TransitionMatrix) -> f64 {
    let scores: Vec<f64> = all_paths(e.rows()).iter().map(|p| explicit_score(e, a, p)).collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

fn well_formed(path: &[Tag]) -> bool {
    let mut prev: Option<Tag> = None;
    for &t in path {
        let inside = matches!(t, Tag::IP | Tag::ID | Tag::IAbn);
        if inside {
            let ok = match prev {
                Some(p) => p != Tag::O && p.kind() == t.kind(),
                None => false,
            };
            if !ok {
                return false;
            }
        }
        prev = Some(t);
    }
    true
}

/// Highest-scoring path by enumeration, optionally restricted to well-formed
/// BIO paths. The first maximum in lexicographic order wins.
pub fn brute_argmax(e: &EmissionMatrix, a: &TransitionMatrix, constrain: bool) -> Vec<Tag> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for p in all_paths(e.rows()) {
        if constrain && !well_formed(&p) {
            continue;
        }
        let s = explicit_score(e, a, &p);
        if s > best {
            best = s;
            arg = p;
        }
    }
    arg
}

/// Central finite differences of `f` over every emission and transition
/// entry that the score reads.
pub fn finite_difference<F>(e: &EmissionMatrix, a: &TransitionMatrix, h: f64, f: F) -> (Vec<f64>, TransitionMatrix)
where
    F: Fn(&EmissionMatrix, &TransitionMatrix) -> f64,
{
    let mut de = vec![0.0; e.as_slice().len()];
    #[allow(clippy::needless_range_loop)]
    for k in 0..de.len() {
        let mut plus = e.clone();
        plus.as_mut_slice()[k] += h;
        let mut minus = e.clone();
        minus.as_mut_slice()[k] -= h;
        de[k] = (f(&plus, a) - f(&minus, a)) / (2.0 * h);
    }
    let mut da = TransitionMatrix::zeros();
    for i in 0..NUM_TAGS + 2 {
        for j in 0..NUM_TAGS + 2 {
            let mut plus = *a;
            plus.0[i][j] += h;
            let mut minus = *a;
            minus.0[i][j] -= h;
            da.0[i][j] = (f(e, &plus) - f(e, &minus)) / (2.0 * h);
        }
    }
    (de, da)
}

pub fn random_tags<R: Rng>(rng: &mut R, n: usize) -> Vec<Tag> {
    (0..n).map(|_| Tag::ALL[rng.random_range(0..NUM_TAGS)]).collect()
}

// ---------------------------------------------------------------------------
// Reference attribute matcher.

pub const SECONDARY_TERMS: [&str; 3] = ["支气管", "胸膜", "叶间裂"];
pub const PRIMARY_TERMS: [&str; 4] = ["右上肺", "左下肺", "纵隔", "右肺门"];
pub const DEGREE_TERMS: [&str; 4] = ["多发", "少许", "部分", "轻度"];
pub const SIGN_TERMS: [&str; 5] = ["斑片状密影", "结节", "闭塞", "增厚", "渗出"];
pub const FILLER: [char; 6] = ['见', '可', '及', '，', '另', '示'];

pub fn secondary_dict() -> SecondaryPartDictionary {
    SecondaryPartDictionary::new(SECONDARY_TERMS).unwrap()
}

/// Builds a sentence of random filler interleaved with up to `max_entities`
/// randomly typed entities drawn from the term pools.
pub fn random_annotated<R: Rng>(rng: &mut R, id: &str, max_entities: usize) -> (Sentence, Vec<Entity>) {
    let count = rng.random_range(0..=max_entities);
    let mut chars: Vec<char> = Vec::new();
    let mut spans: Vec<(EntityKind, usize, usize)> = Vec::new();
    for _ in 0..count {
        for _ in 0..rng.random_range(0..4) {
            chars.push(FILLER[rng.random_range(0..FILLER.len())]);
        }
        let (kind, text) = match rng.random_range(0..4) {
            0 => (EntityKind::P, PRIMARY_TERMS[rng.random_range(0..PRIMARY_TERMS.len())]),
            1 => (EntityKind::P, SECONDARY_TERMS[rng.random_range(0..SECONDARY_TERMS.len())]),
            2 => (EntityKind::D, DEGREE_TERMS[rng.random_range(0..DEGREE_TERMS.len())]),
            _ => (EntityKind::Abn, SIGN_TERMS[rng.random_range(0..SIGN_TERMS.len())]),
        };
        let start = chars.len();
        chars.extend(text.chars());
        spans.push((kind, start, chars.len()));
    }
    for _ in 0..rng.random_range(1..4) {
        chars.push(FILLER[rng.random_range(0..FILLER.len())]);
    }
    let s = Sentence::new(id, chars).unwrap();
    let ents = spans.iter().map(|&(k, a, b)| s.entity(k, a, b).unwrap()).collect();
    (s, ents)
}

/// Enumerates every ordered entity pair and keeps those satisfying the chunk
/// and distance rules, computed directly from start offsets.
pub fn reference_match(
    entities: &[Entity],
    dict: &SecondaryPartDictionary,
) -> (BTreeSet<Relation>, Vec<Quadruple>) {
    let mut primaries: Vec<&Entity> = entities
        .iter()
        .filter(|e| e.kind == EntityKind::P && !dict.contains(&e.text))
        .collect();
    primaries.sort_by_key(|e| e.start);
    let chunk_of = |e: &Entity| primaries.iter().filter(|p| p.start <= e.start).count();
    let head_of = |c: usize| if c == 0 { None } else { Some(primaries[c - 1]) };
    let is_primary = |e: &Entity| primaries.contains(&e);
    #[allow(clippy::implicit_saturating_sub)]
    let gap = |a: &Entity, b: &Entity| {
        if a.end <= b.start {
            b.start - a.end
        } else if b.end <= a.start {
            a.start - b.end
        } else {
            0
        }
    };

    let mut rels = BTreeSet::new();
    for a in entities {
        for b in entities {
            if a == b || chunk_of(a) != chunk_of(b) {
                continue;
            }
            if b.kind == EntityKind::Abn && a.kind != EntityKind::Abn {
                if is_primary(a) {
                    rels.insert(Relation { kind: RelationKind::P2Abn, head: a.clone(), tail: b.clone() });
                    continue;
                }
                // keep only if no other sign in the chunk is strictly closer,
                // or equally close and later
                let beaten = entities.iter().any(|c| {
                    c.kind == EntityKind::Abn
                        && c != b
                        && chunk_of(c) == chunk_of(a)
                        && (gap(a, c) < gap(a, b) || (gap(a, c) == gap(a, b) && c.start > b.start))
                });
                if !beaten {
                    let kind = if a.kind == EntityKind::P { RelationKind::P2Abn } else { RelationKind::D2Abn };
                    rels.insert(Relation { kind, head: a.clone(), tail: b.clone() });
                }
            }
            if a.kind == EntityKind::P && !is_primary(a) && head_of(chunk_of(a)) == Some(b) {
                rels.insert(Relation { kind: RelationKind::P2P, head: a.clone(), tail: b.clone() });
            }
        }
    }

    let mut quads = Vec::new();
    let mut signs: Vec<&Entity> = entities.iter().filter(|e| e.kind == EntityKind::Abn).collect();
    signs.sort();
    signs.dedup();
    for sign in signs {
        let linked = |kind: RelationKind, want_primary: bool| -> Vec<Option<Entity>> {
            let mut v: Vec<Entity> = rels
                .iter()
                .filter(|r| r.kind == kind && &r.tail == sign && is_primary(&r.head) == want_primary)
                .map(|r| r.head.clone())
                .collect();
            v.sort();
            if v.is_empty() {
                vec![None]
            } else {
                v.into_iter().map(Some).collect()
            }
        };
        let pp = linked(RelationKind::P2Abn, true).into_iter().next().flatten();
        for sp in linked(RelationKind::P2Abn, false) {
            for d in linked(RelationKind::D2Abn, false) {
                quads.push(Quadruple { pp: pp.clone(), sp: sp.clone(), d, abn: sign.clone() });
            }
        }
    }
    (rels, quads)
}

// ---------------------------------------------------------------------------
// Synthetic corpus with a character-determined tag rule.

/// Each character belongs to exactly one entity word position or to filler,
/// so the gold tag of every character is a function of the character alone.
pub const TOY_PRIMARY: [&str; 3] = ["右上肺", "左下叶", "纵隔"];
pub const TOY_SECONDARY: [&str; 2] = ["支气管", "胸膜"];
pub const TOY_DEGREE: [&str; 4] = ["多发", "少许", "部分", "轻度"];
pub const TOY_SIGN: [&str; 5] = ["斑片状密影", "结节", "闭塞", "增厚", "渗出"];
pub const TOY_FILLER: [char; 5] = ['见', '可', '及', '另', '示'];

pub fn toy_dict() -> SecondaryPartDictionary {
    SecondaryPartDictionary::new(TOY_SECONDARY).unwrap()
}

/// `count` sentences of one to three clauses shaped
/// `[filler] PP [SP] [filler] [D] Abn [, D Abn]` joined by `，` and ending in
/// `。`.
pub fn toy_corpus<R: Rng>(rng: &mut R, count: usize, prefix: &str) -> Vec<(Sentence, TagSequence, Vec<Entity>)> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut chars: Vec<char> = Vec::new();
        let mut spans: Vec<(EntityKind, usize, usize)> = Vec::new();
        let mut push = |chars: &mut Vec<char>, kind: EntityKind, text: &str| {
            let start = chars.len();
            chars.extend(text.chars());
            spans.push((kind, start, chars.len()));
        };
        let clauses = rng.random_range(1..=3);
        for c in 0..clauses {
            if c > 0 {
                chars.push('，');
            }
            if rng.random_bool(0.3) {
                chars.push(TOY_FILLER[rng.random_range(0..TOY_FILLER.len())]);
            }
            push(&mut chars, EntityKind::P, TOY_PRIMARY[rng.random_range(0..TOY_PRIMARY.len())]);
            if rng.random_bool(0.4) {
                push(&mut chars, EntityKind::P, TOY_SECONDARY[rng.random_range(0..TOY_SECONDARY.len())]);
            }
            if rng.random_bool(0.6) {
                chars.push(TOY_FILLER[rng.random_range(0..TOY_FILLER.len())]);
            }
            if rng.random_bool(0.7) {
                push(&mut chars, EntityKind::D, TOY_DEGREE[rng.random_range(0..TOY_DEGREE.len())]);
            }
            push(&mut chars, EntityKind::Abn, TOY_SIGN[rng.random_range(0..TOY_SIGN.len())]);
            if rng.random_bool(0.3) {
                chars.push('及');
                push(&mut chars, EntityKind::Abn, TOY_SIGN[rng.random_range(0..TOY_SIGN.len())]);
            }
        }
        chars.push('。');
        let s = Sentence::new(format!("{prefix}{k}"), chars).unwrap();
        let ents: Vec<Entity> = spans.iter().map(|&(kd, a, b)| s.entity(kd, a, b).unwrap()).collect();
        let tags = radext_core::tagscheme::entities_to_tags(&s, &ents).unwrap();
        out.push((s, tags, ents));
    }
    out
}

// ---------------------------------------------------------------------------
// Error-analysis fixture.

fn annotated(id: &str, entities: Vec<Entity>) -> AnnotatedSentence {
    AnnotatedSentence::new(id, entities, vec![])
}

/// Sentences embedding the error patterns discussed for the tagger's output:
/// a degree tagged as a body part, a body part swallowing the following
/// enumeration comma, an ordinary body part tagged as an attribute, a missed
/// sign, and two adjacent body parts merged into one.
pub fn error_fixture() -> (Vec<AnnotatedSentence>, Vec<AnnotatedSentence>) {
    let s1 = Sentence::from_text("type", "食管全程扩张，局部较前增著").unwrap();
    let s2 = Sentence::from_text("long", "肝、胆囊见结石").unwrap();
    let s3 = Sentence::from_text("spurious", "两肺膨胀良好").unwrap();
    let s4 = Sentence::from_text("merge", "食管下端贲门区见食糜及液体潴留").unwrap();
    let e = |s: &Sentence, k, a, b| s.entity(k, a, b).unwrap();
    use EntityKind::*;
    let gold = vec![
        annotated("type", vec![e(&s1, P, 0, 2), e(&s1, D, 2, 4), e(&s1, Abn, 4, 6)]),
        annotated("long", vec![e(&s2, P, 0, 1), e(&s2, P, 2, 4), e(&s2, Abn, 5, 7)]),
        annotated("spurious", vec![]),
        annotated("merge", vec![e(&s4, P, 0, 4), e(&s4, P, 4, 7), e(&s4, Abn, 8, 15)]),
    ];
    let pred = vec![
        annotated("type", vec![e(&s1, P, 0, 2), e(&s1, P, 2, 4), e(&s1, Abn, 4, 6)]),
        annotated("long", vec![e(&s2, P, 0, 2), e(&s2, P, 2, 4), e(&s2, Abn, 5, 7)]),
        annotated("spurious", vec![e(&s3, P, 0, 2)]),
        annotated("merge", vec![e(&s4, P, 0, 7)]),
    ];
    (pred, gold)
}

