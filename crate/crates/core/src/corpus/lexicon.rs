//! Cue lexicons and candidate extraction from parallel segments.

use std::collections::HashMap;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GenderCategory, SetTag};

/// Cues named for benchmark construction: titles, marked pronouns and
/// lexically gendered nouns on the gendered side; epicene words and
/// masculine generics on the neutral side.
pub const STARTER_LEXICON: &str = include_str!("../../data/cue_lexicon.tsv");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("lexicon has no header row")]
    MissingHeader,
    #[error("line {line}: expected 3 columns (PATTERN, CLASS, HINT), found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: invalid pattern `{pattern}`: {message}")]
    InvalidPattern { line: usize, pattern: String, message: String },
    #[error("line {line}: invalid class `{value}` (expected gendered or neutral)")]
    InvalidClass { line: usize, value: String },
    #[error("line {line}: invalid hint `{value}` for a {class} cue")]
    InvalidHint { line: usize, value: String, class: &'static str },
    #[error("line {line}: pattern `{pattern}` is already listed as a {other} cue")]
    ConflictingRoles { line: usize, pattern: String, other: &'static str },
    #[error("lexicon is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CueClass {
    Gendered,
    Neutral,
}

impl CueClass {
    fn name(self) -> &'static str {
        match self {
            CueClass::Gendered => "gendered",
            CueClass::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cue {
    pub pattern: String,
    pub class: CueClass,
    /// Masculine or Feminine for gendered cues, absent for neutral ones.
    pub hint: Option<GenderCategory>,
    regex: Regex,
}

impl Cue {
    pub fn new(pattern: &str, class: CueClass, hint: Option<GenderCategory>) -> Result<Self, regex::Error> {
        let regex = Regex::new(&format!(r"\b(?:{pattern})\b"))?;
        Ok(Cue { pattern: pattern.to_owned(), class, hint, regex })
    }
}

#[derive(Debug, Clone, Default)]
pub struct CueLexicon {
    cues: Vec<Cue>,
}

impl CueLexicon {
    /// Parses a `PATTERN \t CLASS \t HINT` table with a header row.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lines = text.lines();
        lines.next().ok_or(LexiconError::MissingHeader)?;
        let mut cues = Vec::new();
        let mut roles: HashMap<String, CueClass> = HashMap::new();
        for (idx, raw) in lines.enumerate() {
            let line = idx + 2;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 3 {
                return Err(LexiconError::ColumnCount { line, found: cols.len() });
            }
            let class = match cols[1] {
                "gendered" => CueClass::Gendered,
                "neutral" => CueClass::Neutral,
                other => return Err(LexiconError::InvalidClass { line, value: other.to_owned() }),
            };
            let hint = match (class, cols[2]) {
                (CueClass::Gendered, "M") => Some(GenderCategory::Masculine),
                (CueClass::Gendered, "F") => Some(GenderCategory::Feminine),
                (CueClass::Neutral, "-") => None,
                (class, other) => return Err(LexiconError::InvalidHint { line, value: other.to_owned(), class: class.name() }),
            };
            let pattern = cols[0];
            if let Some(&other) = roles.get(pattern) {
                if other != class {
                    return Err(LexiconError::ConflictingRoles { line, pattern: pattern.to_owned(), other: other.name() });
                }
            }
            roles.insert(pattern.to_owned(), class);
            let cue = Cue::new(pattern, class, hint).map_err(|e| LexiconError::InvalidPattern {
                line,
                pattern: pattern.to_owned(),
                message: e.to_string(),
            })?;
            cues.push(cue);
        }
        Ok(CueLexicon { cues })
    }

    pub fn starter() -> Self {
        Self::parse(STARTER_LEXICON).expect("bundled lexicon parses")
    }

    pub fn cues(&self) -> &[Cue] {
        &self.cues
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueMatch {
    pub pattern: String,
    pub surface: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint: Option<GenderCategory>,
}

/// A segment pair proposed for one of the two sets, with the cues that
/// decided it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub source: String,
    pub target: String,
    pub proposed: SetTag,
    pub gendered_cues: Vec<CueMatch>,
    pub neutral_cues: Vec<CueMatch>,
}

fn matches_of(cue: &Cue, text: &str) -> Vec<CueMatch> {
    cue.regex
        .find_iter(text)
        .map(|m| CueMatch { pattern: cue.pattern.clone(), surface: m.as_str().to_owned(), hint: cue.hint })
        .collect()
}

/// Proposes Set-G for sources with any gendered cue, Set-N for sources with
/// only neutral cues, and drops the rest. Both cue lists are kept for review.
pub fn extract_candidates<S, T>(segments: &[(S, T)], lexicon: &CueLexicon) -> Result<Vec<Candidate>, LexiconError>
where
    S: AsRef<str>,
    T: AsRef<str>,
{
    if lexicon.is_empty() {
        return Err(LexiconError::Empty);
    }
    let mut out = Vec::new();
    for (index, (source, target)) in segments.iter().enumerate() {
        let source = source.as_ref();
        let mut gendered_cues = Vec::new();
        let mut neutral_cues = Vec::new();
        for cue in lexicon.cues() {
            let found = matches_of(cue, source);
            match cue.class {
                CueClass::Gendered => gendered_cues.extend(found),
                CueClass::Neutral => neutral_cues.extend(found),
            }
        }
        let proposed = if !gendered_cues.is_empty() {
            SetTag::SetG
        } else if !neutral_cues.is_empty() {
            SetTag::SetN
        } else {
            continue;
        };
        out.push(Candidate {
            index,
            source: source.to_owned(),
            target: target.as_ref().to_owned(),
            proposed,
            gendered_cues,
            neutral_cues,
        });
    }
    Ok(out)
}
