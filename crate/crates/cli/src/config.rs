//! Run configuration: one TOML document with a section per module. Values
//! resolve as flags > config file > built-in defaults, and the resolved
//! sections are echoed into every report.

use std::path::Path;

use anyhow::{Context, Result};
use nevl_core::classifier::TrainConfig;
use nevl_core::contrastive::{ExclusionPolicy, RefPolicy, TiePolicy};
use nevl_core::corpus::ValidationOptions;
use nevl_core::metrics::{MetricConfig, MetricKind};
use nevl_core::synthgen::GenerationConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: ValidationOptions,
    pub metrics: MetricConfig,
    pub contrastive: ContrastiveSection,
    pub synth: SynthSection,
    pub classifier: ClassifierSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContrastiveSection {
    pub metrics: Vec<MetricKind>,
    pub ref_policy: RefPolicy,
    pub tie_policy: TiePolicy,
    pub exclusion: ExclusionPolicy,
}

impl Default for ContrastiveSection {
    fn default() -> Self {
        ContrastiveSection {
            metrics: vec![MetricKind::Bleu, MetricKind::Ter, MetricKind::Meteor],
            ref_policy: RefPolicy::default(),
            tie_policy: TiePolicy::default(),
            exclusion: ExclusionPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    /// Offline: triplets per seed. Online: round-1 triplets per seed.
    pub per_seed: usize,
    pub rng: u64,
    /// Run round 2 after round 1 in online mode.
    pub round2: bool,
    pub generation: GenerationConfig,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection { per_seed: 10, rng: 0, round2: true, generation: GenerationConfig::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub train: TrainConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// A `--metrics` flag value; a newtype so clap takes it as one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricList(pub Vec<MetricKind>);

pub fn parse_metric_list(list: &str) -> Result<MetricList, String> {
    parse_metrics(list).map(MetricList)
}

/// Parses a comma-separated metric list; the error names the valid set.
pub fn parse_metrics(list: &str) -> Result<Vec<MetricKind>, String> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind = name.parse::<MetricKind>().map_err(|_| {
            let valid: Vec<&str> = MetricKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown metric `{name}` (valid: {})", valid.join(", "))
        })?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err("empty metric list".into());
    }
    Ok(out)
}
