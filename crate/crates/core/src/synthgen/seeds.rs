use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::GenderCategory;

/// 474 triplets: 158 lemmas, each as definite singular, definite plural and
/// indefinite singular (a demonstrative where an elided article would hide
/// gender). Tags carry the morphology and a `lemma:` key.
pub const DEFAULT_SEEDS: &str = include_str!("../../data/seed_lexicon.tsv");

const COLUMNS: [&str; 4] = ["NEUTRAL", "MASCULINE", "FEMININE", "TAGS"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeedError {
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("header must be `[ID\\t]NEUTRAL\\tMASCULINE\\tFEMININE\\tTAGS`")]
    BadHeader,
    #[error("line {line}: expected {expected} columns, found {found}")]
    MissingColumn { line: usize, expected: usize, found: usize },
    #[error("line {line}: empty {column} form")]
    EmptyForm { line: usize, column: &'static str },
    #[error("line {line}: {first} and {second} forms are identical")]
    IdenticalForms { line: usize, first: &'static str, second: &'static str },
    #[error("line {line}: duplicate seed id `{id}`")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTriplet {
    pub id: String,
    pub neutral: String,
    pub masculine: String,
    pub feminine: String,
    pub morph_tags: BTreeSet<String>,
}

impl SeedTriplet {
    pub fn form(&self, label: GenderCategory) -> &str {
        match label {
            GenderCategory::Neutral => &self.neutral,
            GenderCategory::Masculine => &self.masculine,
            GenderCategory::Feminine => &self.feminine,
        }
    }

    /// The `lemma:` tag value, or the id when untagged. Variants of one
    /// lemma share a group, which keeps held-out splits free of leakage.
    pub fn group(&self) -> &str {
        self.morph_tags.iter().find_map(|t| t.strip_prefix("lemma:")).unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeedLexicon {
    pub seeds: Vec<SeedTriplet>,
    /// Rows dropped because an earlier row had the same three forms.
    pub duplicates: usize,
}

/// Reads `NEUTRAL MASCULINE FEMININE TAGS`, optionally preceded by an `ID`
/// column. Without ids, seeds are numbered `s001`, `s002`, ... in file order.
pub fn load_seed_lexicon(input: &[u8]) -> Result<SeedLexicon, SeedError> {
    let text = std::str::from_utf8(input).map_err(|e| SeedError::Encoding(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header: Vec<&str> = lines.next().ok_or(SeedError::BadHeader)?.split('\t').collect();
    let has_id = match header.as_slice() {
        [rest @ ..] if rest == COLUMNS => false,
        ["ID", rest @ ..] if rest == COLUMNS => true,
        _ => return Err(SeedError::BadHeader),
    };
    let width = header.len();

    let mut lexicon = SeedLexicon::default();
    let mut seen_forms = HashSet::new();
    let mut seen_ids = HashSet::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != width {
            return Err(SeedError::MissingColumn { line: line_no, expected: width, found: cols.len() });
        }
        let (id, forms) = if has_id { (Some(cols[0]), &cols[1..]) } else { (None, &cols[..]) };
        let names = ["NEUTRAL", "MASCULINE", "FEMININE"];
        let mut trimmed = [""; 3];
        for i in 0..3 {
            trimmed[i] = forms[i].trim();
            if trimmed[i].is_empty() {
                return Err(SeedError::EmptyForm { line: line_no, column: names[i] });
            }
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            if trimmed[a] == trimmed[b] {
                return Err(SeedError::IdenticalForms { line: line_no, first: names[a], second: names[b] });
            }
        }
        if !seen_forms.insert(trimmed) {
            lexicon.duplicates += 1;
            continue;
        }
        let id = match id {
            Some(id) => id.trim().to_owned(),
            None => format!("s{:03}", lexicon.seeds.len() + 1),
        };
        if !seen_ids.insert(id.clone()) {
            return Err(SeedError::DuplicateId { line: line_no, id });
        }
        let morph_tags = forms[3].split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_owned).collect();
        lexicon.seeds.push(SeedTriplet {
            id,
            neutral: trimmed[0].to_owned(),
            masculine: trimmed[1].to_owned(),
            feminine: trimmed[2].to_owned(),
            morph_tags,
        });
    }
    if lexicon.duplicates > 0 {
        log::warn!("dropped {} duplicate seed triplets", lexicon.duplicates);
    }
    Ok(lexicon)
}

impl SeedLexicon {
    pub fn bundled() -> Self {
        load_seed_lexicon(DEFAULT_SEEDS.as_bytes()).expect("bundled seed lexicon parses")
    }
}
