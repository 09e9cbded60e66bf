use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{predict, ContrastiveError, ContrastiveVerdict, SystemOutput};
use crate::corpus::{Corpus, CorpusEntry};
use crate::metrics::{sentence_score, MetricConfig, MetricKind};

/// Which neutral reference(s) a sentence is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RefPolicy {
    /// Best score over all neutral references.
    Best,
    /// Best score over the neutral references other than the output's
    /// postedit source; same as `Best` for raw outputs.
    #[default]
    ExcludeSource,
    /// The neutral reference with this 1-based index.
    Single(usize),
}

impl fmt::Display for RefPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefPolicy::Best => f.write_str("best"),
            RefPolicy::ExcludeSource => f.write_str("exclude-source"),
            RefPolicy::Single(k) => write!(f, "single:{k}"),
        }
    }
}

impl From<RefPolicy> for String {
    fn from(p: RefPolicy) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for RefPolicy {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for RefPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "best" => Ok(RefPolicy::Best),
            "exclude-source" => Ok(RefPolicy::ExcludeSource),
            _ => s
                .strip_prefix("single:")
                .and_then(|k| k.parse().ok())
                .map(RefPolicy::Single)
                .ok_or_else(|| format!("invalid reference policy `{s}` (expected best, exclude-source or single:K)")),
        }
    }
}

/// Joins outputs to their entries and checks the per-output invariants.
pub fn resolve<'a>(outputs: &'a [SystemOutput], corpus: &'a Corpus) -> Result<Vec<(&'a SystemOutput, &'a CorpusEntry)>, ContrastiveError> {
    let index: HashMap<&str, &CorpusEntry> = corpus.entries.iter().map(|e| (e.id.as_str(), e)).collect();
    outputs
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let entry = *index
                .get(o.entry_id.as_str())
                .ok_or_else(|| ContrastiveError::UnknownEntry { index: i, id: o.entry_id.clone() })?;
            if o.text.trim().is_empty() {
                return Err(ContrastiveError::EmptyOutput { index: i, id: o.entry_id.clone() });
            }
            if let Some(source) = o.postedit_source {
                if source == 0 || source > entry.neutral_refs.len() {
                    return Err(ContrastiveError::BadPosteditSource {
                        index: i,
                        id: o.entry_id.clone(),
                        postedit: source,
                        available: entry.neutral_refs.len(),
                    });
                }
            }
            Ok((o, entry))
        })
        .collect()
}

/// 1-based neutral reference indices the policy allows for this output.
pub(crate) fn candidate_refs(output: &SystemOutput, entry: &CorpusEntry, policy: RefPolicy) -> Result<Vec<usize>, ContrastiveError> {
    let available = entry.neutral_refs.len();
    let refs: Vec<usize> = match policy {
        RefPolicy::Best => (1..=available).collect(),
        RefPolicy::ExcludeSource => (1..=available).filter(|&k| Some(k) != output.postedit_source).collect(),
        RefPolicy::Single(k) if (1..=available).contains(&k) => vec![k],
        RefPolicy::Single(k) => return Err(ContrastiveError::RefOutOfRange { id: entry.id.clone(), index: k, available }),
    };
    if refs.is_empty() {
        return Err(ContrastiveError::NoNeutralReference { id: entry.id.clone() });
    }
    Ok(refs)
}

/// Scores one output against the gendered reference and the policy's neutral
/// reference(s), and classifies it by which side scores strictly better.
pub fn sentence_contrastive(
    output: &SystemOutput,
    entry: &CorpusEntry,
    metric: MetricKind,
    policy: RefPolicy,
    config: &MetricConfig,
) -> Result<ContrastiveVerdict, ContrastiveError> {
    let direction = metric.direction();
    let one = |reference: &str| -> Result<f64, ContrastiveError> {
        Ok(sentence_score(metric, &output.text, &[reference.to_owned()], config)?.reported())
    };
    let score_vs_gendered = one(&entry.ref_g)?;
    let mut best: Option<(usize, f64)> = None;
    for k in candidate_refs(output, entry, policy)? {
        let s = one(&entry.neutral_refs[k - 1])?;
        if best.map_or(true, |(_, b)| direction.better(s, b)) {
            best = Some((k, s));
        }
    }
    let (neutral_ref, score_vs_neutral) = best.expect("candidate_refs is non-empty");
    Ok(ContrastiveVerdict {
        entry_id: entry.id.clone(),
        metric,
        score_vs_neutral,
        score_vs_gendered,
        neutral_ref,
        predicted: predict(direction, score_vs_neutral, score_vs_gendered),
        gold: entry.set_tag,
    })
}
