use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::features::{featurize, FeatureVector, DIM};
use super::{BinaryLabel, TrainConfig};

pub const MAGIC: &[u8; 4] = b"NEVL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub format_version: u32,
    pub crate_version: String,
    /// Absent for models that were not trained (e.g. the zero model).
    pub train_config: Option<TrainConfig>,
    pub config_digest: String,
    pub corpus_digest: String,
    pub examples_gendered: usize,
    pub examples_neutral: usize,
    /// SGD updates performed: epochs times corpus size.
    pub updates: u64,
}

/// Linear decision layer over hashed features. Weights are always finite
/// and `DIM` long.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) threshold: f64,
    pub(crate) metadata: ModelMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: BinaryLabel,
    /// Probability of `Neutral`.
    pub probability: f64,
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl ClassifierModel {
    /// All-zero weights and bias: every text scores exactly 0.5.
    pub fn zero() -> Self {
        ClassifierModel {
            weights: vec![0.0; DIM],
            bias: 0.0,
            threshold: 0.5,
            metadata: ModelMetadata {
                format_version: FORMAT_VERSION,
                crate_version: env!("CARGO_PKG_VERSION").into(),
                train_config: None,
                config_digest: String::new(),
                corpus_digest: String::new(),
                examples_gendered: 0,
                examples_neutral: 0,
                updates: 0,
            },
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn predict_features(&self, x: &FeatureVector) -> Prediction {
        let probability = logistic(x.dot(&self.weights) + self.bias);
        let label = if probability >= self.threshold { BinaryLabel::Neutral } else { BinaryLabel::Gendered };
        Prediction { label, probability }
    }
}

pub fn predict(model: &ClassifierModel, text: &str) -> Prediction {
    model.predict_features(&featurize(text))
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {found} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("model dimension {found} does not match {DIM}")]
    Dimension { found: u32 },
    #[error("model file is truncated")]
    Truncated,
    #[error("{0} trailing bytes after the metadata block")]
    TrailingBytes(usize),
    #[error("model contains a non-finite parameter")]
    NonFinite,
    #[error("bad metadata: {0}")]
    Metadata(String),
}

/// `NEVL`, u32 version, u32 dimension, weights, bias, threshold (f64), u32
/// metadata length, metadata JSON. All integers and reals little-endian.
pub fn save_model<W: Write>(model: &ClassifierModel, mut sink: W) -> Result<(), ModelError> {
    let meta = serde_json::to_vec(&model.metadata).map_err(|e| ModelError::Metadata(e.to_string()))?;
    let mut buf = Vec::with_capacity(16 + 8 * (model.weights.len() + 2) + meta.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(model.weights.len() as u32).to_le_bytes());
    for w in &model.weights {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    buf.extend_from_slice(&model.bias.to_le_bytes());
    buf.extend_from_slice(&model.threshold.to_le_bytes());
    buf.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    buf.extend_from_slice(&meta);
    sink.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], ModelError> {
        if self.0.len() < n {
            return Err(ModelError::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        let v = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFinite)
        }
    }
}

pub fn load_model<R: Read>(mut source: R) -> Result<ClassifierModel, ModelError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let mut c = Cursor(&bytes);
    if c.take(4).map_err(|_| ModelError::BadMagic)? != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let version = c.u32()?;
    if version != FORMAT_VERSION {
        return Err(ModelError::UnsupportedVersion { found: version });
    }
    let dim = c.u32()?;
    if dim as usize != DIM {
        return Err(ModelError::Dimension { found: dim });
    }
    let weights = (0..DIM).map(|_| c.f64()).collect::<Result<Vec<_>, _>>()?;
    let bias = c.f64()?;
    let threshold = c.f64()?;
    let len = c.u32()? as usize;
    let metadata: ModelMetadata = serde_json::from_slice(c.take(len)?).map_err(|e| ModelError::Metadata(e.to_string()))?;
    if !c.0.is_empty() {
        return Err(ModelError::TrailingBytes(c.0.len()));
    }
    Ok(ClassifierModel { weights, bias, threshold, metadata })
}
