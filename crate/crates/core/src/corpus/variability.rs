use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Corpus, CorpusEntry, SetTag};
use crate::metrics::{bleu, BleuConfig, MetricError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RefRole {
    #[serde(rename = "REF-N1")]
    N1,
    #[serde(rename = "REF-N2")]
    N2,
    #[serde(rename = "REF-N3")]
    N3,
    #[serde(rename = "REF-G")]
    G,
}

impl RefRole {
    pub const ALL: [RefRole; 4] = [RefRole::N1, RefRole::N2, RefRole::N3, RefRole::G];

    pub fn name(self) -> &'static str {
        match self {
            RefRole::N1 => "REF-N1",
            RefRole::N2 => "REF-N2",
            RefRole::N3 => "REF-N3",
            RefRole::G => "REF-G",
        }
    }

    fn text(self, entry: &CorpusEntry) -> &str {
        match self {
            RefRole::N1 => &entry.neutral_refs[0],
            RefRole::N2 => &entry.neutral_refs[1],
            RefRole::N3 => &entry.neutral_refs[2],
            RefRole::G => &entry.ref_g,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum VariabilityError {
    #[error("entry `{id}` has {found} neutral references, 3 are required")]
    MissingReferences { id: String, found: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Corpus BLEU for every ordered (reference role, candidate role) pair of
/// one set. `scores[r][c]` scores role `c` texts against role `r` texts, in
/// `RefRole::ALL` order; the diagonal is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariabilityMatrix {
    pub set: SetTag,
    pub entries: usize,
    pub roles: [RefRole; 4],
    pub scores: [[Option<f64>; 4]; 4],
}

impl VariabilityMatrix {
    pub fn get(&self, reference: RefRole, candidate: RefRole) -> Option<f64> {
        let idx = |r: RefRole| RefRole::ALL.iter().position(|x| *x == r).unwrap();
        self.scores[idx(reference)][idx(candidate)]
    }

    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.scores.iter().flatten().flatten().copied()
    }
}

/// One matrix per set tag that has entries. Every entry must carry three
/// neutral references; callers restrict to the common set first.
pub fn reference_variability(corpus: &Corpus, config: &BleuConfig) -> Result<Vec<VariabilityMatrix>, VariabilityError> {
    if let Some(e) = corpus.entries.iter().find(|e| e.neutral_refs.len() < 3) {
        return Err(VariabilityError::MissingReferences { id: e.id.clone(), found: e.neutral_refs.len() });
    }
    let mut out = Vec::new();
    for set in SetTag::ALL {
        let entries: Vec<&CorpusEntry> = corpus.by_set(set).collect();
        if entries.is_empty() {
            continue;
        }
        let mut scores = [[None; 4]; 4];
        for (r, reference) in RefRole::ALL.into_iter().enumerate() {
            let refs: Vec<Vec<String>> = entries.iter().map(|e| vec![reference.text(e).to_owned()]).collect();
            for (c, candidate) in RefRole::ALL.into_iter().enumerate() {
                if r == c {
                    continue;
                }
                let hyps: Vec<&str> = entries.iter().map(|e| candidate.text(e)).collect();
                scores[r][c] = Some(bleu(&hyps, &refs, config)?.value);
            }
        }
        out.push(VariabilityMatrix { set, entries: entries.len(), roles: RefRole::ALL, scores });
    }
    Ok(out)
}
