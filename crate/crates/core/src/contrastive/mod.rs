//! Dual-reference evaluation: corpus-level gains of the correct reference
//! over the wrong one, and sentence-level gendered/neutral verdicts.

mod corpus_level;
mod io;
mod postedit;
mod sentence;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, SetTag};
use crate::metrics::{Direction, MetricConfig, MetricError, MetricKind};
use crate::report::{ser_round2, ser_round2_opt};

pub use corpus_level::{corpus_contrastive, ExclusionPolicy, ScoreSide, SetContrastive, TraceItem};
pub use io::{parse_outputs, verdicts_tsv, OutputFormatError};
pub use postedit::{apply_neutral_postedit, Postedit, PosteditError};
pub use sentence::{resolve, sentence_contrastive, RefPolicy};

#[derive(Debug, Error, PartialEq)]
pub enum ContrastiveError {
    #[error("correct-side score is zero; the relative gain is undefined")]
    ZeroCorrectScore,
    #[error("output {index} refers to unknown entry `{id}`")]
    UnknownEntry { index: usize, id: String },
    #[error("output {index} for entry `{id}` has empty text")]
    EmptyOutput { index: usize, id: String },
    #[error("output {index} for entry `{id}`: postedit source {postedit} is out of range 1..={available}")]
    BadPosteditSource { index: usize, id: String, postedit: usize, available: usize },
    #[error("entry `{id}` has several outputs but output {index} has no postedit source")]
    MissingPosteditSource { index: usize, id: String },
    #[error("output {index} duplicates an earlier output for entry `{id}` with the same postedit source")]
    DuplicateOutput { index: usize, id: String },
    #[error("reference {index} requested but entry `{id}` has {available} neutral references")]
    RefOutOfRange { id: String, index: usize, available: usize },
    #[error("no neutral reference left for entry `{id}` after excluding the postedit source")]
    NoNeutralReference { id: String },
    #[error("no outputs to evaluate")]
    NoOutputs,
    #[error("no verdicts to aggregate")]
    NoVerdicts,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A system translation of one corpus entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemOutput {
    pub entry_id: String,
    pub text: String,
    /// 1-based index of the neutral reference whose forms were substituted
    /// into this output; absent for raw MT output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postedit_source: Option<usize>,
}

impl SystemOutput {
    pub fn raw(entry_id: impl Into<String>, text: impl Into<String>) -> Self {
        SystemOutput { entry_id: entry_id.into(), text: text.into(), postedit_source: None }
    }

    pub fn edited(entry_id: impl Into<String>, text: impl Into<String>, source: usize) -> Self {
        SystemOutput { entry_id: entry_id.into(), text: text.into(), postedit_source: Some(source) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prediction {
    Gendered,
    Neutral,
    Tie,
}

impl Prediction {
    pub fn code(self) -> &'static str {
        match self {
            Prediction::Gendered => "G",
            Prediction::Neutral => "N",
            Prediction::Tie => "T",
        }
    }
}

/// Strict comparison under the metric's direction.
pub fn predict(direction: Direction, score_vs_neutral: f64, score_vs_gendered: f64) -> Prediction {
    if direction.better(score_vs_neutral, score_vs_gendered) {
        Prediction::Neutral
    } else if direction.better(score_vs_gendered, score_vs_neutral) {
        Prediction::Gendered
    } else {
        Prediction::Tie
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveVerdict {
    pub entry_id: String,
    pub metric: MetricKind,
    /// Scores on the 0-100 reporting scale.
    #[serde(serialize_with = "ser_round2")]
    pub score_vs_neutral: f64,
    #[serde(serialize_with = "ser_round2")]
    pub score_vs_gendered: f64,
    /// 1-based index of the neutral reference that produced `score_vs_neutral`.
    pub neutral_ref: usize,
    pub predicted: Prediction,
    pub gold: SetTag,
}

impl ContrastiveVerdict {
    pub fn is_correct(&self, ties: TiePolicy) -> bool {
        let predicted = match (self.predicted, ties) {
            (Prediction::Tie, TiePolicy::Incorrect) => return false,
            (Prediction::Tie, TiePolicy::Gendered) => Prediction::Gendered,
            (Prediction::Tie, TiePolicy::Neutral) => Prediction::Neutral,
            (p, _) => p,
        };
        matches!((self.gold, predicted), (SetTag::SetG, Prediction::Gendered) | (SetTag::SetN, Prediction::Neutral))
    }
}

/// How a tied verdict counts towards accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    #[default]
    Incorrect,
    /// Ties count as gendered predictions.
    Gendered,
    /// Ties count as neutral predictions.
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetAccuracy {
    pub total: usize,
    pub correct: usize,
    pub ties: usize,
}

impl SetAccuracy {
    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    #[serde(serialize_with = "ser_round2_opt")]
    pub set_g: Option<f64>,
    #[serde(serialize_with = "ser_round2_opt")]
    pub set_n: Option<f64>,
    /// Macro average of the two set accuracies; absent unless both sets
    /// have verdicts.
    #[serde(serialize_with = "ser_round2_opt")]
    pub all: Option<f64>,
    pub counts_g: SetAccuracy,
    pub counts_n: SetAccuracy,
}

pub fn accuracy(verdicts: &[ContrastiveVerdict], ties: TiePolicy) -> Result<Accuracy, ContrastiveError> {
    if verdicts.is_empty() {
        return Err(ContrastiveError::NoVerdicts);
    }
    let count = |set: SetTag| {
        let mut acc = SetAccuracy { total: 0, correct: 0, ties: 0 };
        for v in verdicts.iter().filter(|v| v.gold == set) {
            acc.total += 1;
            acc.correct += v.is_correct(ties) as usize;
            acc.ties += (v.predicted == Prediction::Tie) as usize;
        }
        acc
    };
    let (counts_g, counts_n) = (count(SetTag::SetG), count(SetTag::SetN));
    let (set_g, set_n) = (counts_g.percent(), counts_n.percent());
    let all = set_g.zip(set_n).map(|(g, n)| (g + n) / 2.0);
    Ok(Accuracy { set_g, set_n, all, counts_g, counts_n })
}

/// Relative gain of the correct reference over the wrong one, in percent,
/// with the sign flipped for lower-is-better metrics so that a positive
/// value always means the metric rewards the correct reference.
pub fn delta_percent(score_correct: f64, score_wrong: f64, direction: Direction) -> Result<f64, ContrastiveError> {
    if score_correct == 0.0 {
        return Err(ContrastiveError::ZeroCorrectScore);
    }
    let gain = match direction {
        Direction::HigherBetter => score_correct - score_wrong,
        Direction::LowerBetter => score_wrong - score_correct,
    };
    Ok(100.0 * gain / score_correct)
}

/// Corpus-level results plus sentence-level verdicts for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub metric: MetricKind,
    pub sentence_canonical: bool,
    pub ref_policy: RefPolicy,
    pub tie_policy: TiePolicy,
    pub corpus: Vec<SetContrastive>,
    pub accuracy: Accuracy,
    pub verdicts: Vec<ContrastiveVerdict>,
}

/// Both protocols for one metric: corpus-level Δ per set and sentence-level
/// verdicts with their accuracy.
pub fn run_protocol(
    outputs: &[SystemOutput],
    corpus: &Corpus,
    metric: MetricKind,
    ref_policy: RefPolicy,
    tie_policy: TiePolicy,
    exclusion: ExclusionPolicy,
    config: &MetricConfig,
) -> Result<ProtocolReport, ContrastiveError> {
    let corpus_level = corpus_contrastive(outputs, corpus, metric, exclusion, config)?;
    let verdicts = resolve(outputs, corpus)?
        .into_iter()
        .map(|(o, e)| sentence_contrastive(o, e, metric, ref_policy, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ProtocolReport {
        metric,
        sentence_canonical: metric.is_sentence_canonical(),
        ref_policy,
        tie_policy,
        accuracy: accuracy(&verdicts, tie_policy)?,
        corpus: corpus_level,
        verdicts,
    })
}
