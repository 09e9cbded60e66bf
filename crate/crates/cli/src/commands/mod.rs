pub mod classifier;
pub mod corpus;
pub mod eval;
pub mod score;
pub mod synth;

use std::path::Path;

use anyhow::{Context, Result};
use nevl_core::corpus::{parse_corpus, Corpus};
use serde::de::DeserializeOwned;

use crate::report::{read_input, InputDigest};

/// Flag parser for enums whose config spelling is their serde name, so a
/// flag value and a config value are always written the same way.
pub fn serde_value<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

pub fn load_corpus(path: &Path) -> Result<(Corpus, InputDigest)> {
    let (bytes, digest) = read_input(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let corpus = parse_corpus(&name, &bytes).with_context(|| format!("parsing corpus {}", path.display()))?;
    Ok((corpus, digest))
}
