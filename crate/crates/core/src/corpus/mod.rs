//! Benchmark corpora: data model, TSV I/O, validation, cue-based candidate
//! extraction, length statistics and cross-reference variability.

mod lexicon;
mod stats;
mod tsv;
mod validate;
mod variability;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{extract_candidates, Candidate, Cue, CueClass, CueLexicon, CueMatch, LexiconError, STARTER_LEXICON};
pub use stats::{content_token_count, stats, CorpusStats, SetStats};
pub use tsv::{parse_corpus, serialize_corpus, write_corpus, HEADER};
pub use validate::{validate, Finding, ValidationOptions, ValidationReport};
pub use variability::{reference_variability, RefRole, VariabilityError, VariabilityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderCategory {
    #[serde(rename = "N")]
    Neutral,
    #[serde(rename = "M")]
    Masculine,
    #[serde(rename = "F")]
    Feminine,
}

impl GenderCategory {
    pub fn code(self) -> &'static str {
        match self {
            GenderCategory::Neutral => "N",
            GenderCategory::Masculine => "M",
            GenderCategory::Feminine => "F",
        }
    }

    /// The set a category belongs to.
    pub fn set_tag(self) -> SetTag {
        match self {
            GenderCategory::Neutral => SetTag::SetN,
            GenderCategory::Masculine | GenderCategory::Feminine => SetTag::SetG,
        }
    }
}

impl fmt::Display for GenderCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for GenderCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(GenderCategory::Neutral),
            "M" => Ok(GenderCategory::Masculine),
            "F" => Ok(GenderCategory::Feminine),
            other => Err(other.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SetTag {
    /// Gender-ambiguous sources; neutral translations expected.
    #[serde(rename = "Set-N")]
    SetN,
    /// Gender-unambiguous sources; gendered translations expected.
    #[serde(rename = "Set-G")]
    SetG,
}

impl SetTag {
    pub const ALL: [SetTag; 2] = [SetTag::SetN, SetTag::SetG];

    pub fn code(self) -> &'static str {
        match self {
            SetTag::SetN => "Set-N",
            SetTag::SetG => "Set-G",
        }
    }
}

impl fmt::Display for SetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for SetTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Set-N" => Ok(SetTag::SetN),
            "Set-G" => Ok(SetTag::SetG),
            other => Err(other.to_owned()),
        }
    }
}

/// One bilingual benchmark item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub set_tag: SetTag,
    pub category: GenderCategory,
    pub common_set: bool,
    pub source: String,
    pub ref_g: String,
    /// One neutral reference, or three for common-set entries.
    pub neutral_refs: Vec<String>,
}

impl CorpusEntry {
    /// Neutral reference by 1-based translator index.
    pub fn neutral_ref(&self, index: usize) -> Option<&str> {
        index.checked_sub(1).and_then(|i| self.neutral_refs.get(i)).map(String::as_str)
    }

    pub fn expected_neutral_refs(&self) -> usize {
        if self.common_set {
            3
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, entries: Vec<CorpusEntry>) -> Self {
        Corpus { name: name.into(), entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn by_set(&self, set: SetTag) -> impl Iterator<Item = &CorpusEntry> {
        self.entries.iter().filter(move |e| e.set_tag == set)
    }

    /// The common-set entries, in corpus order.
    pub fn common_set(&self) -> Corpus {
        Corpus {
            name: format!("{}/common-set", self.name),
            entries: self.entries.iter().filter(|e| e.common_set).cloned().collect(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("missing header row")]
    MissingHeader,
    #[error("line 1: unexpected header (expected `{expected}`)")]
    BadHeader { expected: String },
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    ColumnCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: invalid {column} value `{value}`")]
    InvalidCode { line: usize, column: &'static str, value: String },
    #[error("line {line}: category {category} does not belong to {set}")]
    CategoryMismatch { line: usize, category: GenderCategory, set: SetTag },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: common-set row needs 3 neutral references, found {found}")]
    MissingNeutralRefs { line: usize, found: usize },
    #[error("line {line}: non-common row must leave REF-N2 and REF-N3 empty")]
    UnexpectedNeutralRefs { line: usize },
    #[error("line {line}: empty {column}")]
    EmptyField { line: usize, column: &'static str },
    #[error("line {line}: REF-G is identical to REF-N{index}")]
    IdenticalReferences { line: usize, index: usize },
    #[error("entry `{id}`: field {column} contains a tab or newline")]
    UnencodableField { id: String, column: &'static str },
}
