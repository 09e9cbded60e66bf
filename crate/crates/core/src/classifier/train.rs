use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::features::{featurize, FeatureVector, DIM};
use super::model::{logistic, ClassifierModel, ModelMetadata, FORMAT_VERSION};
use super::{BinaryLabel, ClassBalance, TrainConfig};
use crate::report::sha256_hex;
use crate::synthgen::SyntheticExample;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("no training examples")]
    Empty,
    #[error("training data holds only {0:?} examples")]
    SingleClass(BinaryLabel),
    #[error("example {index} is not marked valid")]
    InvalidExample { index: usize },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("training diverged to a non-finite weight")]
    Diverged,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(TrainError::Config(format!("l2 must be non-negative, got {}", self.l2)));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

/// Digest of the training data as seen by the trainer: one `LABEL\tTEXT`
/// line per example, in order.
pub fn corpus_digest<'a>(examples: impl IntoIterator<Item = (&'a str, BinaryLabel)>) -> String {
    let mut buf = Vec::new();
    for (text, label) in examples {
        buf.extend_from_slice(label.code().as_bytes());
        buf.push(b'\t');
        buf.extend_from_slice(text.as_bytes());
        buf.push(b'\n');
    }
    sha256_hex(&buf)
}

/// Trains on validated synthetic examples; M and F both map to `Gendered`.
pub fn train(examples: &[SyntheticExample], config: &TrainConfig) -> Result<ClassifierModel, TrainError> {
    if let Some(index) = examples.iter().position(|e| !e.valid) {
        return Err(TrainError::InvalidExample { index });
    }
    let labeled: Vec<(&str, BinaryLabel)> = examples.iter().map(|e| (e.text.as_str(), BinaryLabel::from(e.label))).collect();
    train_labeled(&labeled, config)
}

pub fn train_labeled(examples: &[(&str, BinaryLabel)], config: &TrainConfig) -> Result<ClassifierModel, TrainError> {
    let features: Vec<(FeatureVector, BinaryLabel)> = examples.iter().map(|(t, l)| (featurize(t), *l)).collect();
    train_features(&features, config, corpus_digest(examples.iter().copied()))
}

/// Logistic-loss SGD with step size `learning_rate / sqrt(t)` (t counts
/// updates from 1) and L2 decay on the weights, not the bias. Examples are
/// reshuffled every epoch from one generator seeded with `rng_seed`, so the
/// result depends only on (example order, config). Single-threaded.
pub fn train_features(examples: &[(FeatureVector, BinaryLabel)], config: &TrainConfig, corpus_digest: String) -> Result<ClassifierModel, TrainError> {
    config.validate()?;
    if examples.is_empty() {
        return Err(TrainError::Empty);
    }
    let n_neutral = examples.iter().filter(|(_, l)| *l == BinaryLabel::Neutral).count();
    let n_gendered = examples.len() - n_neutral;
    match (n_gendered, n_neutral) {
        (0, _) => return Err(TrainError::SingleClass(BinaryLabel::Neutral)),
        (_, 0) => return Err(TrainError::SingleClass(BinaryLabel::Gendered)),
        _ => {}
    }
    // Balanced reweights each class to half the total loss; the unbalanced
    // default keeps the corpus ratio and weight 1 everywhere.
    let class_weight = |l: BinaryLabel| match config.class_balance {
        ClassBalance::Unbalanced => 1.0,
        ClassBalance::Balanced => {
            let n = if l == BinaryLabel::Neutral { n_neutral } else { n_gendered };
            examples.len() as f64 / (2.0 * n as f64)
        }
    };

    // Weights are stored as scale * v so the L2 decay is O(1) per update.
    let mut v = vec![0.0f64; DIM];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut t: u64 = 0;
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let (x, label) = &examples[i];
            let lr = config.learning_rate / (t as f64).sqrt();
            let y = if *label == BinaryLabel::Neutral { 1.0 } else { 0.0 };
            let p = logistic(scale * x.dot(&v) + bias);
            let g = (p - y) * class_weight(*label);
            scale *= 1.0 - lr * config.l2;
            for &(j, xj) in x.entries() {
                v[j as usize] -= lr * g * xj / scale;
            }
            bias -= lr * g;
            if scale < 1e-6 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    let weights: Vec<f64> = v.iter().map(|w| w * scale).collect();
    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(TrainError::Diverged);
    }
    Ok(ClassifierModel {
        weights,
        bias,
        threshold: 0.5,
        metadata: ModelMetadata {
            format_version: FORMAT_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").into(),
            train_config: Some(config.clone()),
            config_digest: config.digest(),
            corpus_digest,
            examples_gendered: n_gendered,
            examples_neutral: n_neutral,
            updates: t,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{predict, save_model, ClassifierModel};
    use crate::corpus::GenderCategory;
    use crate::synthgen::Round;

    const TOY: [(&str, BinaryLabel); 6] = [
        ("chi insegna", BinaryLabel::Neutral),
        ("il personale docente", BinaryLabel::Neutral),
        ("la persona che studia", BinaryLabel::Neutral),
        ("il professore", BinaryLabel::Gendered),
        ("la professoressa", BinaryLabel::Gendered),
        ("lo studente", BinaryLabel::Gendered),
    ];

    fn toy_examples() -> Vec<SyntheticExample> {
        let cat = |l: BinaryLabel, i: usize| match (l, i % 2) {
            (BinaryLabel::Neutral, _) => GenderCategory::Neutral,
            (_, 0) => GenderCategory::Masculine,
            _ => GenderCategory::Feminine,
        };
        TOY.iter()
            .enumerate()
            .map(|(i, (t, l))| SyntheticExample { text: t.to_string(), label: cat(*l, i), seed_id: "s".into(), round: Round::Offline, valid: true })
            .collect()
    }

    /// Perceptron on the exact feature vectors; a returned hyperplane that
    /// separates all points with positive margin certifies separability.
    fn separating_hyperplane(points: &[(FeatureVector, BinaryLabel)]) -> Option<(Vec<f64>, f64)> {
        let mut w = vec![0.0; DIM];
        let mut b = 0.0;
        for _ in 0..1000 {
            let mut mistakes = 0;
            for (x, l) in points {
                let y = if *l == BinaryLabel::Neutral { 1.0 } else { -1.0 };
                if y * (x.dot(&w) + b) <= 0.0 {
                    mistakes += 1;
                    for &(j, v) in x.entries() {
                        w[j as usize] += y * v;
                    }
                    b += y;
                }
            }
            if mistakes == 0 {
                return Some((w, b));
            }
        }
        None
    }

    #[test]
    fn toy_set_is_separable_and_learned() {
        let points: Vec<(FeatureVector, BinaryLabel)> = TOY.iter().map(|(t, l)| (featurize(t), *l)).collect();
        assert!(separating_hyperplane(&points).is_some());
        let cfg = TrainConfig { epochs: 50, learning_rate: 1.0, ..Default::default() };
        let model = train(&toy_examples(), &cfg).unwrap();
        for (t, l) in TOY {
            assert_eq!(predict(&model, t).label, l, "{t}");
        }
    }

    #[test]
    fn deterministic_to_the_byte() {
        let cfg = TrainConfig { epochs: 3, rng_seed: 11, ..Default::default() };
        let a = train(&toy_examples(), &cfg).unwrap();
        let b = train(&toy_examples(), &cfg).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        save_model(&a, &mut ba).unwrap();
        save_model(&b, &mut bb).unwrap();
        assert_eq!(ba, bb);
        let c = train(&toy_examples(), &TrainConfig { rng_seed: 12, ..cfg }).unwrap();
        assert_ne!(a.weights, c.weights);
    }

    #[test]
    fn unbalanced_sees_each_example_once_per_epoch() {
        let cfg = TrainConfig { epochs: 4, ..Default::default() };
        let model = train(&toy_examples(), &cfg).unwrap();
        assert_eq!(model.metadata().updates, 4 * 6);
        assert_eq!((model.metadata().examples_gendered, model.metadata().examples_neutral), (3, 3));
        assert_eq!(model.metadata().config_digest, cfg.digest());
    }

    #[test]
    fn balanced_weighting_changes_the_model() {
        let mut ex = toy_examples();
        ex.extend(toy_examples().into_iter().filter(|e| e.label != GenderCategory::Neutral));
        let cfg = TrainConfig { learning_rate: 1.0, epochs: 3, ..Default::default() };
        let a = train(&ex, &cfg).unwrap();
        let b = train(&ex, &TrainConfig { class_balance: ClassBalance::Balanced, ..cfg }).unwrap();
        // upweighting the minority neutral class raises its mean probability
        let mean = |m: &ClassifierModel| ex.iter().map(|e| predict(m, &e.text).probability).sum::<f64>() / ex.len() as f64;
        assert!(mean(&b) > mean(&a));
    }

    #[test]
    fn errors() {
        let cfg = TrainConfig::default();
        assert_eq!(train(&[], &cfg).unwrap_err(), TrainError::Empty);
        let neutral_only: Vec<_> = toy_examples().into_iter().filter(|e| e.label == GenderCategory::Neutral).collect();
        assert_eq!(train(&neutral_only, &cfg).unwrap_err(), TrainError::SingleClass(BinaryLabel::Neutral));
        let mut ex = toy_examples();
        ex[2].valid = false;
        assert_eq!(train(&ex, &cfg).unwrap_err(), TrainError::InvalidExample { index: 2 });
        assert!(matches!(train(&toy_examples(), &TrainConfig { epochs: 0, ..cfg.clone() }), Err(TrainError::Config(_))));
        assert!(matches!(train(&toy_examples(), &TrainConfig { learning_rate: 0.0, ..cfg }), Err(TrainError::Config(_))));
    }
}
