//! Versioned JSON model document.

use std::fs;
use std::path::Path;

use radext_core::crf::{TransitionMatrix, TRANSITION_SIZE};
use radext_core::tagscheme::{Tag, NUM_TAGS};
use radext_core::{FeatureVocabulary, LinearScorerParams, Model};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "radext-crf/1";

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    tags: Vec<String>,
    /// `transitions[i][j]`, tags then start then end.
    transitions: Vec<Vec<f64>>,
    features: Vec<String>,
    /// One row of seven tag weights per feature.
    weights: Vec<Vec<f64>>,
}

pub fn model_to_json(model: &Model) -> String {
    let doc = ModelDocument {
        format: MODEL_FORMAT.into(),
        tags: Tag::ALL.iter().map(|t| t.label().to_string()).collect(),
        transitions: model.transitions.0.iter().map(|r| r.to_vec()).collect(),
        features: model.vocab.names().to_vec(),
        weights: model.weights.as_slice().chunks(NUM_TAGS).map(<[f64]>::to_vec).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

pub fn model_from_json(text: &str, path: &Path) -> Result<Model> {
    let bad = |message: String| Error::Model {
        path: path.into(),
        message,
    };
    let doc: ModelDocument =
        serde_json::from_str(text).map_err(|e| bad(format!("not a model document: {e}")))?;
    if doc.format != MODEL_FORMAT {
        return Err(bad(format!("unsupported model format `{}`, expected `{MODEL_FORMAT}`", doc.format)));
    }
    let labels: Vec<&str> = Tag::ALL.iter().map(|t| t.label()).collect();
    if doc.tags != labels {
        return Err(bad(format!("tag inventory {:?} does not match {labels:?}", doc.tags)));
    }
    if doc.transitions.len() != TRANSITION_SIZE || doc.transitions.iter().any(|r| r.len() != TRANSITION_SIZE) {
        return Err(bad(format!("transitions must be {TRANSITION_SIZE}x{TRANSITION_SIZE}")));
    }
    let mut transitions = TransitionMatrix::zeros();
    for (i, row) in doc.transitions.iter().enumerate() {
        transitions.0[i].copy_from_slice(row);
    }
    if !transitions.is_finite() {
        return Err(bad("transitions contain a non-finite value".into()));
    }
    if doc.weights.len() != doc.features.len() || doc.weights.iter().any(|r| r.len() != NUM_TAGS) {
        return Err(bad(format!(
            "expected {} weight rows of {NUM_TAGS} values",
            doc.features.len()
        )));
    }
    let vocab = FeatureVocabulary::from_names(doc.features)
        .ok_or_else(|| bad("feature list must start with the unknown marker and be distinct".into()))?;
    let weights = LinearScorerParams::from_weights(doc.weights.concat()).map_err(|e| bad(e.to_string()))?;
    Ok(Model {
        vocab,
        weights,
        transitions,
    })
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text, path)
}
