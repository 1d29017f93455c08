//! File formats, model persistence, reports and the pipeline behind the
//! `radext` command-line tool.

pub mod config;
pub mod error;
pub mod formats;
pub mod jsonl;
pub mod model_file;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
