//! Character-level extraction of abnormal imaging signs from chest imaging
//! report sentences.
//!
//! The pipeline is: per-character emission scores (a sparse linear feature
//! scorer or an externally supplied matrix) feed a linear-chain CRF over a
//! seven-tag BIO scheme; decoded tags become `P` / `D` / `Abn` entities; a
//! dictionary of secondary body parts splits the sentence into chunks and
//! attaches attributes to signs, yielding `{PP, SP, D, Abn}` quadruples.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, model
//! persistence and the command line live in the `radext` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod corpus;
pub mod crf;
pub mod encoder;
pub mod error;
pub mod eval;
mod math;
pub mod tag2relation;
pub mod tagscheme;
pub mod trainer;

pub use corpus::{
    EmissionMatrix, Entity, EntityKind, Quadruple, Relation, RelationKind,
    SecondaryPartDictionary, Sentence,
};
pub use crf::TransitionMatrix;
pub use encoder::{FeatureVocabulary, LinearScorerParams};
pub use error::{Error, Result};
pub use tagscheme::{Tag, TagSequence, NUM_TAGS};
pub use trainer::{Model, TrainConfig, TrainReport};
