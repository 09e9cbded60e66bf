//! Reference-free evaluation: a binary gendered/neutral sentence classifier.
//! A linear decision layer over hashed character, suffix and determiner
//! features, trained by logistic SGD on synthetic data.

mod evaluate;
mod features;
mod model;
mod split;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{GenderCategory, SetTag};

pub use evaluate::{evaluate, EmptyEvaluation, EvalAccuracy, Evaluation};
pub use features::{feature_index, feature_names, featurize, featurize_with_embedding, tokens, FeatureVector, DETERMINERS, DIM, DIM_BITS};
pub use model::{load_model, logistic, predict, save_model, ClassifierModel, ModelError, ModelMetadata, Prediction, FORMAT_VERSION, MAGIC};
pub use split::{split_by_key, split_by_seed_group, split_by_triplet};
pub use train::{corpus_digest, train, train_features, train_labeled, TrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryLabel {
    #[serde(rename = "G")]
    Gendered,
    #[serde(rename = "N")]
    Neutral,
}

impl BinaryLabel {
    pub fn code(self) -> &'static str {
        match self {
            BinaryLabel::Gendered => "G",
            BinaryLabel::Neutral => "N",
        }
    }

    /// Row/column in a confusion matrix.
    pub fn index(self) -> usize {
        match self {
            BinaryLabel::Gendered => 0,
            BinaryLabel::Neutral => 1,
        }
    }
}

impl From<GenderCategory> for BinaryLabel {
    fn from(c: GenderCategory) -> Self {
        match c {
            GenderCategory::Neutral => BinaryLabel::Neutral,
            GenderCategory::Masculine | GenderCategory::Feminine => BinaryLabel::Gendered,
        }
    }
}

/// A Set-N source expects a neutral output, a Set-G source a gendered one.
impl From<SetTag> for BinaryLabel {
    fn from(s: SetTag) -> Self {
        match s {
            SetTag::SetN => BinaryLabel::Neutral,
            SetTag::SetG => BinaryLabel::Gendered,
        }
    }
}

impl fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Accepts `G`/`N`, the category codes `M`/`F`, and set names.
impl FromStr for BinaryLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "G" | "M" | "F" | "Set-G" => Ok(BinaryLabel::Gendered),
            "N" | "Set-N" => Ok(BinaryLabel::Neutral),
            other => Err(other.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassBalance {
    /// Train on the corpus as is: two gendered sentences per neutral one.
    #[default]
    Unbalanced,
    /// Reweight the loss so both classes contribute equally.
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Initial step size; the step at update t is learning_rate / sqrt(t).
    /// Large because inputs are unit vectors spread over a few hundred
    /// features, most of them shared by both classes.
    pub learning_rate: f64,
    pub l2: f64,
    pub rng_seed: u64,
    pub class_balance: ClassBalance,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 5, learning_rate: 100.0, l2: 1e-6, rng_seed: 0, class_balance: ClassBalance::Unbalanced }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(BinaryLabel::from(GenderCategory::Feminine), BinaryLabel::Gendered);
        assert_eq!(BinaryLabel::from(SetTag::SetN), BinaryLabel::Neutral);
        for s in ["G", "N", "M", "F", "Set-G", "Set-N"] {
            assert!(s.parse::<BinaryLabel>().is_ok());
        }
        assert!("X".parse::<BinaryLabel>().is_err());
    }
}
