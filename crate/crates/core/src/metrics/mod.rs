//! N-gram overlap metrics: BLEU, chrF, TER and METEOR.
//!
//! Every metric is computed from per-segment sufficient statistics so that
//! sentence-level and corpus-level scores share one code path: a sentence
//! score is the corpus score of a one-segment corpus.

mod bleu;
mod chrf;
mod meteor;
mod ter;
mod tokenize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{bleu, BleuConfig, BleuStats, Smoothing, Tokenizer};
pub use chrf::{chrf, ChrfConfig, ChrfStats};
pub use meteor::{meteor, meteor_corpus, Alignment, MatchStage, MeteorParams, MeteorStats};
pub use ter::{ter, ter_corpus, TerConfig, TerStats};
pub use tokenize::{normalize_13a, tokenize_13a};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("{hypotheses} hypotheses but {references} reference lists")]
    LengthMismatch { hypotheses: usize, references: usize },
    #[error("no segments to score")]
    NoSegments,
    #[error("segment {segment} has no references")]
    NoReferences { segment: usize },
    #[error("reference {reference} of segment {segment} is empty after tokenization")]
    EmptyReference { segment: usize, reference: usize },
    #[error("sentence-level scoring needs exactly one segment, got {0}")]
    NotSingleSegment(usize),
    #[error("invalid metric configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown metric `{0}` (expected one of: bleu, chrf, ter, meteor)")]
    UnknownMetric(String),
}

/// Which way a metric improves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

impl Direction {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::HigherBetter => a > b,
            Direction::LowerBetter => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Bleu,
    Chrf,
    Ter,
    Meteor,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [MetricKind::Bleu, MetricKind::Chrf, MetricKind::Ter, MetricKind::Meteor];

    pub fn direction(self) -> Direction {
        match self {
            MetricKind::Ter => Direction::LowerBetter,
            _ => Direction::HigherBetter,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Bleu => "bleu",
            MetricKind::Chrf => "chrf",
            MetricKind::Ter => "ter",
            MetricKind::Meteor => "meteor",
        }
    }

    /// The perfect score on the metric's native scale.
    pub fn perfect(self) -> f64 {
        match self {
            MetricKind::Bleu | MetricKind::Chrf => 100.0,
            MetricKind::Ter => 0.0,
            MetricKind::Meteor => 1.0,
        }
    }

    /// BLEU, TER and METEOR are the metrics tested at sentence level.
    pub fn is_sentence_canonical(self) -> bool {
        !matches!(self, MetricKind::Chrf)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bleu" => Ok(MetricKind::Bleu),
            "chrf" => Ok(MetricKind::Chrf),
            "ter" => Ok(MetricKind::Ter),
            "meteor" => Ok(MetricKind::Meteor),
            other => Err(MetricError::UnknownMetric(other.to_owned())),
        }
    }
}

/// A metric value on its native scale: [0, 100] for BLEU and chrF, >= 0 for
/// TER, [0, 1] for METEOR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub kind: MetricKind,
    pub value: f64,
}

impl MetricScore {
    pub fn new(kind: MetricKind, value: f64) -> Self {
        MetricScore { kind, value }
    }

    pub fn direction(&self) -> Direction {
        self.kind.direction()
    }

    /// The value on the 0-100 reporting scale.
    pub fn reported(&self) -> f64 {
        match self.kind {
            MetricKind::Meteor => self.value * 100.0,
            _ => self.value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Sentence,
    Corpus,
}

/// Configuration for all four metrics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub bleu: BleuConfig,
    pub chrf: ChrfConfig,
    pub ter: TerConfig,
    pub meteor: MeteorParams,
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        self.bleu.validate()?;
        self.chrf.validate()?;
        self.ter.validate()?;
        self.meteor.validate()
    }
}

pub(crate) fn check_shape<H, R>(hypotheses: &[H], references: &[R]) -> Result<(), MetricError>
where
    R: AsRef<[String]>,
{
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hypotheses.len(),
            references: references.len(),
        });
    }
    if hypotheses.is_empty() {
        return Err(MetricError::NoSegments);
    }
    if let Some(segment) = references.iter().position(|r| r.as_ref().is_empty()) {
        return Err(MetricError::NoReferences { segment });
    }
    Ok(())
}

/// Scores `hypotheses` against `references` (one list of references per
/// hypothesis) with any of the four metrics.
pub fn score<H, R>(
    kind: MetricKind,
    hypotheses: &[H],
    references: &[R],
    level: Level,
    config: &MetricConfig,
) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<[String]>,
{
    if level == Level::Sentence && hypotheses.len() != 1 {
        return Err(MetricError::NotSingleSegment(hypotheses.len()));
    }
    match kind {
        MetricKind::Bleu => bleu(hypotheses, references, &config.bleu),
        MetricKind::Chrf => chrf(hypotheses, references, &config.chrf),
        MetricKind::Ter => ter_corpus(hypotheses, references, &config.ter),
        MetricKind::Meteor => meteor_corpus(hypotheses, references, &config.meteor),
    }
}

/// Sentence-level score of one hypothesis against its references.
pub fn sentence_score(
    kind: MetricKind,
    hypothesis: &str,
    references: &[String],
    config: &MetricConfig,
) -> Result<MetricScore, MetricError> {
    score(kind, &[hypothesis], &[references], Level::Sentence, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions() {
        assert_eq!(MetricKind::Ter.direction(), Direction::LowerBetter);
        for k in [MetricKind::Bleu, MetricKind::Chrf, MetricKind::Meteor] {
            assert_eq!(k.direction(), Direction::HigherBetter);
        }
        assert!(Direction::LowerBetter.better(1.0, 2.0));
        assert!(!Direction::HigherBetter.better(1.0, 1.0));
    }

    #[test]
    fn parses_names() {
        assert_eq!("BLEU".parse::<MetricKind>().unwrap(), MetricKind::Bleu);
        assert!(matches!("rouge".parse::<MetricKind>(), Err(MetricError::UnknownMetric(_))));
    }

    #[test]
    fn sentence_level_needs_one_segment() {
        let refs = vec![vec!["a".to_string()], vec!["b".to_string()]];
        let err = score(MetricKind::Bleu, &["a", "b"], &refs, Level::Sentence, &MetricConfig::default());
        assert_eq!(err, Err(MetricError::NotSingleSegment(2)));
    }

    #[test]
    fn shape_errors() {
        let refs: Vec<Vec<String>> = vec![vec![]];
        let cfg = MetricConfig::default();
        for kind in MetricKind::ALL {
            assert_eq!(
                score(kind, &["a"], &refs, Level::Corpus, &cfg),
                Err(MetricError::NoReferences { segment: 0 })
            );
            let none: [&str; 0] = [];
            let no_refs: Vec<Vec<String>> = vec![];
            assert_eq!(score(kind, &none, &no_refs, Level::Corpus, &cfg), Err(MetricError::NoSegments));
            assert!(matches!(
                score(kind, &["a", "b"], &[vec!["a".to_string()]], Level::Corpus, &cfg),
                Err(MetricError::LengthMismatch { .. })
            ));
        }
    }
}
