//! Human-readable tables and machine-readable reports.

use std::fmt::Write as _;

use radext_core::eval::{
    AgreementScores, ConfusionMatrix, EntityScores, ErrorAnalysis, ErrorCategory, ErrorRecord,
    ErrorSummary, ExtentKind, PrfScores,
};
use radext_core::EntityKind;
use serde::Serialize;

/// Report written by `eval` and `errors`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum EvalReport {
    Entity { scores: EntityScores },
    Relation { entities: EntityScores, relations: PrfScores },
    Agreement { scores: AgreementScores },
    Errors(Box<ErrorReport>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub exact: usize,
    pub summary: ErrorSummary,
    pub confusion: ConfusionMatrix,
    pub records: Vec<ErrorRecord>,
}

impl From<ErrorAnalysis> for ErrorReport {
    fn from(a: ErrorAnalysis) -> Self {
        Self {
            exact: a.exact,
            summary: a.summary,
            confusion: a.confusion,
            records: a.records,
        }
    }
}

/// Aligned P/R/F1 table with two decimals.
pub fn prf_table(rows: &[(&str, PrfScores)]) -> String {
    let width = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>9}  {:>9}  {:>9}  {:>7}  {:>9}  {:>7}",
        "", "Precision", "Recall", "F1", "Correct", "Predicted", "Gold"
    );
    for (label, s) in rows {
        let _ = writeln!(
            out,
            "{label:<width$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>7}  {:>9}  {:>7}",
            s.precision, s.recall, s.f1, s.correct, s.predicted, s.gold
        );
    }
    out
}

fn entity_rows(scores: &EntityScores) -> Vec<(&'static str, PrfScores)> {
    let mut rows: Vec<(&str, PrfScores)> = EntityKind::ALL
        .iter()
        .map(|k| (k.as_str(), scores.by_kind[k.index()]))
        .collect();
    rows.push(("Overall", scores.overall));
    rows
}

pub fn confusion_csv(m: &ConfusionMatrix) -> String {
    let mut out = String::from("gold\\predicted");
    for l in ConfusionMatrix::LABELS {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (i, row) in m.counts.iter().enumerate() {
        out.push_str(ConfusionMatrix::LABELS[i]);
        for c in row {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

fn error_text(r: &ErrorReport) -> String {
    let s = &r.summary;
    let mut out = String::new();
    let _ = writeln!(out, "exact matches: {}", r.exact);
    let _ = writeln!(out, "errors: {}", s.total_errors);
    for (c, share) in ErrorCategory::ALL.iter().zip(&s.by_category) {
        let _ = writeln!(out, "  {:<9} {:>6}  {:>6.2}%", c.as_str(), share.count, share.percent);
    }
    let _ = writeln!(out, "\nper kind (share of gold):");
    let _ = writeln!(out, "  {:<4} {:>6}  {:>15}  {:>15}  {:>15}", "kind", "gold", "MISSING", "SPURIOUS", "TYPE");
    for k in EntityKind::ALL {
        let i = k.index();
        let cell = |sh: &radext_core::eval::Share| format!("{} ({:.2}%)", sh.count, sh.percent);
        let _ = writeln!(
            out,
            "  {:<4} {:>6}  {:>15}  {:>15}  {:>15}",
            k.as_str(),
            s.gold_totals[i],
            cell(&s.missing_by_kind[i]),
            cell(&s.spurious_by_kind[i]),
            cell(&s.type_by_kind[i]),
        );
    }
    let _ = writeln!(out, "\nextent errors:");
    let _ = writeln!(out, "  {:<5} {:>5} {:>5} {:>5}", "", "P", "D", "Abn");
    for x in ExtentKind::ALL {
        let row = s.extent[x.index()];
        let _ = writeln!(out, "  {:<5} {:>5} {:>5} {:>5}", x.as_str(), row[0], row[1], row[2]);
    }
    let _ = writeln!(out, "\nconfusion (gold rows, predicted columns):");
    let _ = write!(out, "  {:<4}", "");
    for l in ConfusionMatrix::LABELS {
        let _ = write!(out, " {l:>5}");
    }
    out.push('\n');
    for (i, row) in r.confusion.counts.iter().enumerate() {
        let _ = write!(out, "  {:<4}", ConfusionMatrix::LABELS[i]);
        for c in row {
            let _ = write!(out, " {c:>5}");
        }
        out.push('\n');
    }
    out
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        match self {
            EvalReport::Entity { scores } => prf_table(&entity_rows(scores)),
            EvalReport::Relation { entities, relations } => {
                let mut rows = entity_rows(entities);
                rows.push(("Relation", *relations));
                prf_table(&rows)
            }
            EvalReport::Agreement { scores } => {
                prf_table(&[("Entity", scores.entities), ("Relation", scores.relations)])
            }
            EvalReport::Errors(r) => error_text(r),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
