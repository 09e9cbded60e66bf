use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use nevl_core::metrics::{score, sentence_score, Level, MetricConfig, MetricKind};
use nevl_core::report::ser_round2;
use serde::Serialize;

use crate::config::{parse_metric_list, FileConfig, MetricList};
use crate::report::{read_input, write_json, Envelope, InputDigest};
use crate::Outcome;

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Hypotheses, one segment per line.
    #[arg(long, value_name = "PATH")]
    pub hyp: PathBuf,
    /// References, one segment per line, aligned with the hypotheses.
    /// Repeat for several references per segment.
    #[arg(long = "ref", value_name = "PATH", required = true)]
    pub refs: Vec<PathBuf>,
    /// Comma-separated metrics.
    #[arg(long, value_parser = parse_metric_list, default_value = "bleu,chrf,ter,meteor")]
    pub metrics: MetricList,
    /// Also report one score per segment.
    #[arg(long)]
    pub sentences: bool,
    /// JSON report path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricResult {
    metric: MetricKind,
    /// On the 0-100 reporting scale.
    #[serde(serialize_with = "ser_round2")]
    corpus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sentences: Option<Vec<Rounded>>,
}

#[derive(Serialize)]
struct Rounded(#[serde(serialize_with = "ser_round2")] f64);

fn read_lines(path: &PathBuf) -> Result<(Vec<String>, InputDigest)> {
    let (bytes, digest) = read_input(path)?;
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not valid UTF-8", path.display()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let lines = text.lines().map(str::to_owned).collect();
    Ok((lines, digest))
}

pub fn run(a: ScoreArgs, file: &FileConfig) -> Result<Outcome> {
    file.metrics.validate()?;
    let (hyps, hyp_digest) = read_lines(&a.hyp)?;
    let mut inputs = vec![hyp_digest];
    let mut refs: Vec<Vec<String>> = vec![Vec::new(); hyps.len()];
    for path in &a.refs {
        let (lines, digest) = read_lines(path)?;
        if lines.len() != hyps.len() {
            bail!("{} has {} lines, the hypotheses have {}", path.display(), lines.len(), hyps.len());
        }
        inputs.push(digest);
        for (slot, line) in refs.iter_mut().zip(lines) {
            slot.push(line);
        }
    }
    let mut results = Vec::new();
    for &metric in &a.metrics.0 {
        let corpus = score(metric, &hyps, &refs, Level::Corpus, &file.metrics)?.reported();
        let sentences = if a.sentences {
            let per: Result<Vec<Rounded>> = hyps
                .iter()
                .zip(&refs)
                .map(|(h, r)| Ok(Rounded(sentence_score(metric, h, r, &file.metrics)?.reported())))
                .collect();
            Some(per?)
        } else {
            None
        };
        results.push(MetricResult { metric, corpus, sentences });
    }
    let config: &MetricConfig = &file.metrics;
    write_json(a.out.as_ref(), &Envelope::new("score", config, inputs, results))?;
    Ok(Outcome::Clean)
}
