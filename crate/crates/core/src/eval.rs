//! Strict-match scoring and entity error analysis.
//!
//! An entity is correct only when sentence, kind, start and end all match a
//! gold entity; a relation only when its kind and both endpoints match.
//! Scores are micro-averaged over the corpus and reported in percent.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{Entity, EntityKind, Relation, RelationKind};

/// Entities and relations of one sentence, keyed by sentence id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub id: String,
    pub entities: Vec<Entity>,
    pub relations: Vec<Relation>,
}

impl AnnotatedSentence {
    pub fn new(id: impl Into<String>, entities: Vec<Entity>, relations: Vec<Relation>) -> Self {
        Self {
            id: id.into(),
            entities,
            relations,
        }
    }
}

/// Precision, recall and F1 in `[0, 100]`, derived from the stored counts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrfScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl PrfScores {
    /// Two empty sides agree perfectly and score 100; a zero denominator on
    /// one side only gives 0 for that ratio.
    pub fn from_counts(correct: usize, predicted: usize, gold: usize) -> Self {
        if predicted == 0 && gold == 0 {
            return Self {
                precision: 100.0,
                recall: 100.0,
                f1: 100.0,
                correct,
                predicted,
                gold,
            };
        }
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                100.0 * num as f64 / den as f64
            }
        };
        let precision = ratio(correct, predicted);
        let recall = ratio(correct, gold);
        Self {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            correct,
            predicted,
            gold,
        }
    }
}

/// `2PR / (P + R)`, or 0 when both are 0.
pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntityScores {
    pub overall: PrfScores,
    /// Indexed by [`EntityKind::index`].
    pub by_kind: [PrfScores; 3],
}

type SpanKey = (EntityKind, usize, usize);

fn span_key(e: &Entity) -> SpanKey {
    (e.kind, e.start, e.end)
}

/// Counts matches between two multisets of keys.
fn count_matches<K: Ord + Clone>(pred: &[K], gold: &[K]) -> usize {
    let mut pool: BTreeMap<K, usize> = BTreeMap::new();
    for k in gold {
        *pool.entry(k.clone()).or_default() += 1;
    }
    let mut hits = 0;
    for k in pred {
        if let Some(c) = pool.get_mut(k) {
            if *c > 0 {
                *c -= 1;
                hits += 1;
            }
        }
    }
    hits
}

fn entity_keys(corpus: &[AnnotatedSentence], kind: Option<EntityKind>) -> Vec<(&str, SpanKey)> {
    corpus
        .iter()
        .flat_map(|s| {
            s.entities
                .iter()
                .filter(move |e| kind.is_none_or(|k| e.kind == k))
                .map(move |e| (s.id.as_str(), span_key(e)))
        })
        .collect()
}

fn prf_for(pred: &[AnnotatedSentence], gold: &[AnnotatedSentence], kind: Option<EntityKind>) -> PrfScores {
    let p = entity_keys(pred, kind);
    let g = entity_keys(gold, kind);
    PrfScores::from_counts(count_matches(&p, &g), p.len(), g.len())
}

/// Strict entity scores, overall and per kind.
pub fn entity_prf(pred: &[AnnotatedSentence], gold: &[AnnotatedSentence]) -> EntityScores {
    EntityScores {
        overall: prf_for(pred, gold, None),
        by_kind: EntityKind::ALL.map(|k| prf_for(pred, gold, Some(k))),
    }
}

type RelationKey<'a> = (&'a str, RelationKind, SpanKey, SpanKey);

fn relation_keys(corpus: &[AnnotatedSentence]) -> Vec<RelationKey<'_>> {
    corpus
        .iter()
        .flat_map(|s| {
            s.relations
                .iter()
                .map(move |r| (s.id.as_str(), r.kind, span_key(&r.head), span_key(&r.tail)))
        })
        .collect()
}

/// Strict relation scores: kind and both endpoints must match.
pub fn relation_prf(pred: &[AnnotatedSentence], gold: &[AnnotatedSentence]) -> PrfScores {
    let p = relation_keys(pred);
    let g = relation_keys(gold);
    PrfScores::from_counts(count_matches(&p, &g), p.len(), g.len())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgreementScores {
    pub entities: PrfScores,
    pub relations: PrfScores,
}

/// Inter-annotator agreement: precision is identical items over A's total,
/// recall identical items over B's total.
pub fn agreement_f1(a: &[AnnotatedSentence], b: &[AnnotatedSentence]) -> AgreementScores {
    AgreementScores {
        entities: entity_prf(a, b).overall,
        relations: relation_prf(a, b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum ErrorCategory {
    /// Exact span, wrong kind.
    Type,
    /// Same kind, overlapping but not identical span.
    Extent,
    /// Prediction without a matching gold entity.
    Spurious,
    /// Gold entity without a matching prediction.
    Missing,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 4] = [
        ErrorCategory::Type,
        ErrorCategory::Extent,
        ErrorCategory::Spurious,
        ErrorCategory::Missing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Type => "TYPE",
            ErrorCategory::Extent => "EXTENT",
            ErrorCategory::Spurious => "SPURIOUS",
            ErrorCategory::Missing => "MISSING",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ExtentKind {
    /// Predicted span lies within the gold span.
    #[cfg_attr(feature = "serde", serde(rename = "SHORT"))]
    Short,
    /// Predicted span covers the gold span.
    #[cfg_attr(feature = "serde", serde(rename = "LONG"))]
    Long,
    /// Neither.
    #[cfg_attr(feature = "serde", serde(rename = "S&L"))]
    ShortAndLong,
}

impl ExtentKind {
    pub const ALL: [ExtentKind; 3] = [ExtentKind::Short, ExtentKind::Long, ExtentKind::ShortAndLong];

    pub fn of(pred: &Entity, gold: &Entity) -> Self {
        if gold.start <= pred.start && pred.end <= gold.end {
            ExtentKind::Short
        } else if pred.start <= gold.start && gold.end <= pred.end {
            ExtentKind::Long
        } else {
            ExtentKind::ShortAndLong
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExtentKind::Short => "SHORT",
            ExtentKind::Long => "LONG",
            ExtentKind::ShortAndLong => "S&L",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorRecord {
    pub sentence_id: String,
    pub category: ErrorCategory,
    pub extent: Option<ExtentKind>,
    pub predicted: Option<Entity>,
    pub gold: Option<Entity>,
}

/// Axis index of the "no entity" row / column.
pub const NONE_AXIS: usize = 3;

/// Gold (rows) × predicted (columns) counts over `P, D, Abn, O`.
///
/// Exact matches sit on the diagonal and type errors off it. A missing gold
/// entity, or one only reached by an extent error, counts in column `O`; a
/// spurious prediction counts in row `O`. Each gold row therefore sums to the
/// number of gold entities of that kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    pub counts: [[usize; 4]; 4],
}

impl ConfusionMatrix {
    pub const LABELS: [&'static str; 4] = ["P", "D", "Abn", "O"];

    pub fn row_sum(&self, row: usize) -> usize {
        self.counts[row].iter().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| i == j || self.counts[i][j] == 0))
    }
}

/// One count with its share of some total, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Share {
    pub count: usize,
    pub total: usize,
    pub percent: f64,
}

impl Share {
    fn new(count: usize, total: usize) -> Self {
        let percent = if total == 0 {
            0.0
        } else {
            100.0 * count as f64 / total as f64
        };
        Self {
            count,
            total,
            percent,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorSummary {
    pub total_errors: usize,
    /// Per category, against all errors. Indexed like [`ErrorCategory::ALL`].
    pub by_category: [Share; 4],
    /// Gold entity count per kind.
    pub gold_totals: [usize; 3],
    /// Missed gold entities per kind, against that kind's gold total.
    pub missing_by_kind: [Share; 3],
    /// Spurious predictions per kind, against that kind's gold total.
    pub spurious_by_kind: [Share; 3],
    /// Type errors per gold kind, against that kind's gold total.
    pub type_by_kind: [Share; 3],
    /// `extent[subtype][kind]`, rows in [`ExtentKind::ALL`] order.
    pub extent: [[usize; 3]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorAnalysis {
    pub records: Vec<ErrorRecord>,
    pub confusion: ConfusionMatrix,
    pub summary: ErrorSummary,
    /// Number of exactly matched predictions.
    pub exact: usize,
}

/// Classifies every non-exact prediction and every unmatched gold entity.
///
/// Matching runs in passes within each sentence: exact matches, then type
/// errors (identical span), then extent errors (same kind, best overlap, ties
/// to the earlier gold entity). Whatever remains is spurious or missing.
pub fn classify_errors(pred: &[AnnotatedSentence], gold: &[AnnotatedSentence]) -> ErrorAnalysis {
    let mut order: Vec<&str> = Vec::new();
    let mut by_id: BTreeMap<&str, (Vec<Entity>, Vec<Entity>)> = BTreeMap::new();
    for s in gold {
        if !by_id.contains_key(s.id.as_str()) {
            order.push(&s.id);
        }
        by_id.entry(&s.id).or_default().1.extend(s.entities.iter().cloned());
    }
    for s in pred {
        if !by_id.contains_key(s.id.as_str()) {
            order.push(&s.id);
        }
        by_id.entry(&s.id).or_default().0.extend(s.entities.iter().cloned());
    }

    let mut records = Vec::new();
    let mut confusion = ConfusionMatrix::default();
    let mut exact = 0;
    let mut gold_totals = [0usize; 3];
    for id in order {
        let (mut p, mut g) = by_id.remove(id).unwrap_or_default();
        p.sort();
        g.sort();
        for e in &g {
            gold_totals[e.kind.index()] += 1;
        }
        exact += classify_sentence(id, &p, &g, &mut records, &mut confusion);
    }

    let mut by_cat = [0usize; 4];
    let mut missing = [0usize; 3];
    let mut spurious = [0usize; 3];
    let mut types = [0usize; 3];
    let mut extent = [[0usize; 3]; 3];
    for r in &records {
        by_cat[r.category as usize] += 1;
        match r.category {
            ErrorCategory::Type => types[r.gold.as_ref().map_or(0, |e| e.kind.index())] += 1,
            ErrorCategory::Extent => {
                let k = r.gold.as_ref().map_or(0, |e| e.kind.index());
                extent[r.extent.map_or(0, ExtentKind::index)][k] += 1;
            }
            ErrorCategory::Spurious => {
                spurious[r.predicted.as_ref().map_or(0, |e| e.kind.index())] += 1
            }
            ErrorCategory::Missing => missing[r.gold.as_ref().map_or(0, |e| e.kind.index())] += 1,
        }
    }
    let total_errors = records.len();
    let per_kind = |counts: [usize; 3]| -> [Share; 3] {
        [0, 1, 2].map(|k| Share::new(counts[k], gold_totals[k]))
    };
    let summary = ErrorSummary {
        total_errors,
        by_category: by_cat.map(|c| Share::new(c, total_errors)),
        gold_totals,
        missing_by_kind: per_kind(missing),
        spurious_by_kind: per_kind(spurious),
        type_by_kind: per_kind(types),
        extent,
    };
    ErrorAnalysis {
        records,
        confusion,
        summary,
        exact,
    }
}

fn classify_sentence(
    id: &str,
    pred: &[Entity],
    gold: &[Entity],
    records: &mut Vec<ErrorRecord>,
    confusion: &mut ConfusionMatrix,
) -> usize {
    let mut p_used = vec![false; pred.len()];
    let mut g_used = vec![false; gold.len()];
    let mut exact = 0;
    let record = |category, extent, p: Option<&Entity>, g: Option<&Entity>| ErrorRecord {
        sentence_id: String::from(id),
        category,
        extent,
        predicted: p.cloned(),
        gold: g.cloned(),
    };

    for (i, p) in pred.iter().enumerate() {
        if let Some(j) = (0..gold.len()).find(|&j| !g_used[j] && gold[j].kind == p.kind && gold[j].same_span(p)) {
            p_used[i] = true;
            g_used[j] = true;
            exact += 1;
            confusion.counts[p.kind.index()][p.kind.index()] += 1;
        }
    }
    for (i, p) in pred.iter().enumerate() {
        if p_used[i] {
            continue;
        }
        if let Some(j) = (0..gold.len()).find(|&j| !g_used[j] && gold[j].same_span(p)) {
            p_used[i] = true;
            g_used[j] = true;
            confusion.counts[gold[j].kind.index()][p.kind.index()] += 1;
            records.push(record(ErrorCategory::Type, None, Some(p), Some(&gold[j])));
        }
    }
    for (i, p) in pred.iter().enumerate() {
        if p_used[i] {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for (j, g) in gold.iter().enumerate() {
            if g_used[j] || g.kind != p.kind {
                continue;
            }
            let ov = p.overlap_len(g);
            if ov > 0 && best.is_none_or(|(_, b)| ov > b) {
                best = Some((j, ov));
            }
        }
        if let Some((j, _)) = best {
            p_used[i] = true;
            g_used[j] = true;
            confusion.counts[gold[j].kind.index()][NONE_AXIS] += 1;
            let ext = ExtentKind::of(p, &gold[j]);
            records.push(record(ErrorCategory::Extent, Some(ext), Some(p), Some(&gold[j])));
        }
    }
    for (i, p) in pred.iter().enumerate() {
        if !p_used[i] {
            confusion.counts[NONE_AXIS][p.kind.index()] += 1;
            records.push(record(ErrorCategory::Spurious, None, Some(p), None));
        }
    }
    for (j, g) in gold.iter().enumerate() {
        if !g_used[j] {
            confusion.counts[g.kind.index()][NONE_AXIS] += 1;
            records.push(record(ErrorCategory::Missing, None, None, Some(g)));
        }
    }
    exact
}
