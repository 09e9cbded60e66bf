use serde::Serialize;
use thiserror::Error;

use super::features::featurize;
use super::model::ClassifierModel;
use super::BinaryLabel;
use crate::report::{ser_round2, ser_round2_opt};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("nothing to evaluate")]
pub struct EmptyEvaluation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalAccuracy {
    /// Recall on gold-gendered sentences, in percent.
    #[serde(serialize_with = "ser_round2_opt")]
    pub set_g: Option<f64>,
    /// Recall on gold-neutral sentences, in percent.
    #[serde(serialize_with = "ser_round2_opt")]
    pub set_n: Option<f64>,
    /// Mean of the two per-class accuracies; absent unless both classes
    /// have gold examples.
    #[serde(rename = "macro", serialize_with = "ser_round2_opt")]
    pub macro_avg: Option<f64>,
    #[serde(serialize_with = "ser_round2")]
    pub micro: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: EvalAccuracy,
    /// `confusion[gold][predicted]`, index 0 = Gendered, 1 = Neutral.
    pub confusion: [[usize; 2]; 2],
}

impl Evaluation {
    pub fn from_confusion(confusion: [[usize; 2]; 2]) -> Result<Self, EmptyEvaluation> {
        let total: usize = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(EmptyEvaluation);
        }
        let recall = |row: [usize; 2], hit: usize| {
            let n = row[0] + row[1];
            (n > 0).then(|| 100.0 * row[hit] as f64 / n as f64)
        };
        let set_g = recall(confusion[0], 0);
        let set_n = recall(confusion[1], 1);
        Ok(Evaluation {
            accuracy: EvalAccuracy {
                set_g,
                set_n,
                macro_avg: set_g.zip(set_n).map(|(g, n)| (g + n) / 2.0),
                micro: 100.0 * (confusion[0][0] + confusion[1][1]) as f64 / total as f64,
            },
            confusion,
        })
    }
}

pub fn evaluate<S: AsRef<str>>(model: &ClassifierModel, labeled: &[(S, BinaryLabel)]) -> Result<Evaluation, EmptyEvaluation> {
    let mut confusion = [[0usize; 2]; 2];
    for (text, gold) in labeled {
        let predicted = model.predict_features(&featurize(text.as_ref())).label;
        confusion[gold.index()][predicted.index()] += 1;
    }
    Evaluation::from_confusion(confusion)
}
