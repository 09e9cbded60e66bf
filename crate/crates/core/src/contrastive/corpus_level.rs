use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{delta_percent, resolve, ContrastiveError, SystemOutput};
use crate::corpus::{Corpus, CorpusEntry, SetTag};
use crate::metrics::{score, Level, MetricConfig, MetricKind};
use crate::report::{ser_round2, ser_round2_opt};

/// What to do with an output that lacks provenance on an entry that has
/// several outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExclusionPolicy {
    /// Reject it: every output of a multi-output entry must name the neutral
    /// reference it was edited from.
    #[default]
    Strict,
    /// Score it as raw output against every neutral reference.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreSide {
    Gendered,
    Neutral,
}

/// One corpus-level score that went into an average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceItem {
    /// Postedit source shared by the scored outputs; absent for raw output.
    pub group: Option<usize>,
    pub side: ScoreSide,
    /// 1-based neutral reference index, absent for the gendered reference.
    pub neutral_ref: Option<usize>,
    pub segments: usize,
    #[serde(serialize_with = "ser_round2")]
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetContrastive {
    pub set: SetTag,
    pub metric: MetricKind,
    /// Mean corpus score against the references the set calls for.
    #[serde(serialize_with = "ser_round2")]
    pub score_correct: f64,
    #[serde(serialize_with = "ser_round2")]
    pub score_wrong: f64,
    /// Undefined when the correct-side score is zero (e.g. TER of outputs
    /// identical to their correct references).
    #[serde(serialize_with = "ser_round2_opt")]
    pub delta_percent: Option<f64>,
    pub trace: Vec<TraceItem>,
}

fn check_provenance(pairs: &[(&SystemOutput, &CorpusEntry)], policy: ExclusionPolicy) -> Result<(), ContrastiveError> {
    let mut per_entry: HashMap<&str, usize> = HashMap::new();
    for (o, _) in pairs {
        *per_entry.entry(o.entry_id.as_str()).or_default() += 1;
    }
    let mut seen = HashSet::new();
    for (index, (o, _)) in pairs.iter().enumerate() {
        if policy == ExclusionPolicy::Strict && per_entry[o.entry_id.as_str()] > 1 && o.postedit_source.is_none() {
            return Err(ContrastiveError::MissingPosteditSource { index, id: o.entry_id.clone() });
        }
        if !seen.insert((o.entry_id.as_str(), o.postedit_source)) {
            return Err(ContrastiveError::DuplicateOutput { index, id: o.entry_id.clone() });
        }
    }
    Ok(())
}

/// Corpus-level dual-reference scores per set.
///
/// Outputs are grouped by postedit source. Each group is scored as a corpus
/// against every neutral reference slot except its own source, and against
/// the gendered reference. The correct side of a set (neutral for Set-N,
/// gendered for Set-G) is the mean of its group/slot scores, likewise the
/// wrong side. Sets without outputs are omitted.
pub fn corpus_contrastive(
    outputs: &[SystemOutput],
    corpus: &Corpus,
    metric: MetricKind,
    policy: ExclusionPolicy,
    config: &MetricConfig,
) -> Result<Vec<SetContrastive>, ContrastiveError> {
    let pairs = resolve(outputs, corpus)?;
    if pairs.is_empty() {
        return Err(ContrastiveError::NoOutputs);
    }
    check_provenance(&pairs, policy)?;

    let mut results = Vec::new();
    for set in SetTag::ALL {
        let mut groups: BTreeMap<Option<usize>, Vec<(&SystemOutput, &CorpusEntry)>> = BTreeMap::new();
        for &(o, e) in pairs.iter().filter(|(_, e)| e.set_tag == set) {
            groups.entry(o.postedit_source).or_default().push((o, e));
        }
        if groups.is_empty() {
            continue;
        }
        let mut trace = Vec::new();
        for (&group, members) in &groups {
            let slots = members.iter().map(|(_, e)| e.neutral_refs.len()).max().unwrap_or(0);
            for k in (1..=slots).filter(|&k| Some(k) != group) {
                let scored: Vec<_> = members.iter().filter(|(_, e)| e.neutral_refs.len() >= k).collect();
                let hyps: Vec<&str> = scored.iter().map(|(o, _)| o.text.as_str()).collect();
                let refs: Vec<[String; 1]> = scored.iter().map(|(_, e)| [e.neutral_refs[k - 1].clone()]).collect();
                let s = score(metric, &hyps, &refs, Level::Corpus, config)?;
                trace.push(TraceItem { group, side: ScoreSide::Neutral, neutral_ref: Some(k), segments: hyps.len(), score: s.reported() });
            }
            let hyps: Vec<&str> = members.iter().map(|(o, _)| o.text.as_str()).collect();
            let refs: Vec<[String; 1]> = members.iter().map(|(_, e)| [e.ref_g.clone()]).collect();
            let s = score(metric, &hyps, &refs, Level::Corpus, config)?;
            trace.push(TraceItem { group, side: ScoreSide::Gendered, neutral_ref: None, segments: hyps.len(), score: s.reported() });
        }
        let mean = |side: ScoreSide| -> Option<f64> {
            let xs: Vec<f64> = trace.iter().filter(|t| t.side == side).map(|t| t.score).collect();
            (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
        };
        let (correct, wrong) = match set {
            SetTag::SetN => (ScoreSide::Neutral, ScoreSide::Gendered),
            SetTag::SetG => (ScoreSide::Gendered, ScoreSide::Neutral),
        };
        let (Some(score_correct), Some(score_wrong)) = (mean(correct), mean(wrong)) else {
            let id = groups.values().next().and_then(|m| m.first()).map(|(_, e)| e.id.clone()).unwrap_or_default();
            return Err(ContrastiveError::NoNeutralReference { id });
        };
        let delta = delta_percent(score_correct, score_wrong, metric.direction()).ok();
        results.push(SetContrastive { set, metric, score_correct, score_wrong, delta_percent: delta, trace });
    }
    Ok(results)
}
