use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use nevl_core::contrastive::{parse_outputs, run_protocol, verdicts_tsv, ExclusionPolicy, ProtocolReport, RefPolicy, TiePolicy};
use nevl_core::metrics::MetricConfig;
use serde::Serialize;

use super::{load_corpus, serde_value};
use crate::config::{parse_metric_list, ContrastiveSection, FileConfig, MetricList};
use crate::report::{read_input, write_json, Envelope};
use crate::Outcome;

#[derive(Debug, Subcommand)]
pub enum EvalCmd {
    /// Contrastive scoring of system outputs against neutral and gendered
    /// references, at corpus and sentence level.
    Contrastive(ContrastiveArgs),
}

#[derive(Debug, Args)]
pub struct ContrastiveArgs {
    /// Benchmark corpus TSV.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// System outputs TSV (`ENTRY_ID TEXT [POSTEDIT_SOURCE]`).
    #[arg(long, value_name = "PATH")]
    pub outputs: PathBuf,
    /// Comma-separated metrics.
    #[arg(long, value_parser = parse_metric_list)]
    pub metrics: Option<MetricList>,
    /// best, exclude-source or single:K.
    #[arg(long, value_parser = |s: &str| s.parse::<RefPolicy>())]
    pub ref_policy: Option<RefPolicy>,
    /// incorrect, gendered or neutral.
    #[arg(long, value_parser = serde_value::<TiePolicy>)]
    pub tie_policy: Option<TiePolicy>,
    /// strict or lenient.
    #[arg(long, value_parser = serde_value::<ExclusionPolicy>)]
    pub exclusion: Option<ExclusionPolicy>,
    /// Directory for per-metric sentence verdict TSVs.
    #[arg(long, value_name = "DIR")]
    pub verdicts_dir: Option<PathBuf>,
    /// JSON report path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    contrastive: &'a ContrastiveSection,
    metrics: &'a MetricConfig,
}

pub fn run(cmd: EvalCmd, file: &FileConfig) -> Result<Outcome> {
    let EvalCmd::Contrastive(a) = cmd;
    let d = &file.contrastive;
    let section = ContrastiveSection {
        metrics: a.metrics.map(|m| m.0).unwrap_or_else(|| d.metrics.clone()),
        ref_policy: a.ref_policy.unwrap_or(d.ref_policy),
        tie_policy: a.tie_policy.unwrap_or(d.tie_policy),
        exclusion: a.exclusion.unwrap_or(d.exclusion),
    };
    file.metrics.validate()?;
    let (corpus, corpus_digest) = load_corpus(&a.input)?;
    let (bytes, outputs_digest) = read_input(&a.outputs)?;
    let outputs = parse_outputs(&bytes).with_context(|| format!("parsing outputs {}", a.outputs.display()))?;

    let mut reports: Vec<ProtocolReport> = Vec::new();
    for &metric in &section.metrics {
        let r = run_protocol(&outputs, &corpus, metric, section.ref_policy, section.tie_policy, section.exclusion, &file.metrics)
            .with_context(|| format!("metric {metric}"))?;
        reports.push(r);
    }
    if let Some(dir) = &a.verdicts_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &reports {
            let path = dir.join(format!("verdicts_{}.tsv", r.metric));
            std::fs::write(&path, verdicts_tsv(&r.verdicts)).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let config = ResolvedConfig { contrastive: &section, metrics: &file.metrics };
    write_json(a.out.as_ref(), &Envelope::new("eval contrastive", config, vec![corpus_digest, outputs_digest], reports))?;
    Ok(Outcome::Clean)
}
