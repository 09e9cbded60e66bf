use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Subcommand};
use nevl_core::classifier::{evaluate, load_model, predict, save_model, train, BinaryLabel, ClassBalance, ClassifierModel, ModelMetadata, TrainConfig};
use nevl_core::contrastive::parse_outputs;
use nevl_core::synthgen::{parse_synthetic, SyntheticExample};
use serde::Serialize;

use super::{load_corpus, serde_value};
use crate::config::FileConfig;
use crate::report::{read_input, write_json, write_output, Envelope, InputDigest};
use crate::Outcome;

#[derive(Debug, Subcommand)]
pub enum ClassifierCmd {
    /// Train on a synthetic corpus TSV (valid rows only).
    Train(TrainArgs),
    /// Label sentences, one per input line, as TEXT LABEL PROB.
    Classify(ClassifyArgs),
    /// Accuracy against gold labels.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Synthetic corpus TSV.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Model file to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// JSON training report; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Shuffling seed.
    #[arg(long)]
    pub rng: Option<u64>,
    /// unbalanced or balanced.
    #[arg(long, value_parser = serde_value::<ClassBalance>)]
    pub class_balance: Option<ClassBalance>,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Trained model file.
    #[arg(long, value_name = "PATH", required_unless_present = "zero_model", conflicts_with = "zero_model")]
    pub model: Option<PathBuf>,
    /// All-zero debug model: every probability is 0.5.
    #[arg(long)]
    pub zero_model: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Sentences, one per line; `-` for stdin.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Prediction TSV; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Labeled TSV whose first two columns are TEXT and LABEL.
    #[arg(long = "in", value_name = "PATH", required_unless_present = "corpus", conflicts_with = "corpus")]
    pub input: Option<PathBuf>,
    /// Benchmark corpus giving gold labels by set (with --outputs).
    #[arg(long, value_name = "PATH", requires = "outputs")]
    pub corpus: Option<PathBuf>,
    /// System outputs TSV to classify.
    #[arg(long, value_name = "PATH", requires = "corpus")]
    pub outputs: Option<PathBuf>,
    /// JSON report path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(cmd: ClassifierCmd, file: &FileConfig) -> Result<Outcome> {
    match cmd {
        ClassifierCmd::Train(a) => cmd_train(a, file),
        ClassifierCmd::Classify(a) => cmd_classify(a),
        ClassifierCmd::Evaluate(a) => cmd_evaluate(a),
    }
}

#[derive(Serialize)]
struct TrainReport<'a> {
    rows: usize,
    skipped_invalid: usize,
    model: &'a ModelMetadata,
}

fn cmd_train(a: TrainArgs, file: &FileConfig) -> Result<Outcome> {
    let d = &file.classifier.train;
    let config = TrainConfig {
        epochs: a.epochs.unwrap_or(d.epochs),
        learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
        l2: a.l2.unwrap_or(d.l2),
        rng_seed: a.rng.unwrap_or(d.rng_seed),
        class_balance: a.class_balance.unwrap_or(d.class_balance),
    };
    let (bytes, digest) = read_input(&a.input)?;
    let rows = parse_synthetic(&bytes).with_context(|| format!("parsing {}", a.input.display()))?;
    let total = rows.len();
    let valid: Vec<SyntheticExample> = rows.into_iter().filter(|e| e.valid).collect();
    let model = train(&valid, &config)?;
    let mut buf = Vec::new();
    save_model(&model, &mut buf)?;
    write_output(Some(&a.out), &buf)?;
    let report = TrainReport { rows: total, skipped_invalid: total - valid.len(), model: model.metadata() };
    write_json(a.report.as_ref(), &Envelope::new("classifier train", &config, vec![digest], report))?;
    Ok(Outcome::Clean)
}

fn load(m: &ModelArg) -> Result<(ClassifierModel, Option<InputDigest>)> {
    match &m.model {
        Some(p) if !m.zero_model => {
            let (bytes, digest) = read_input(p)?;
            let model = load_model(bytes.as_slice()).with_context(|| format!("loading model {}", p.display()))?;
            Ok((model, Some(digest)))
        }
        _ => Ok((ClassifierModel::zero(), None)),
    }
}

fn cmd_classify(a: ClassifyArgs) -> Result<Outcome> {
    let (model, _) = load(&a.model)?;
    let (bytes, _) = read_input(&a.input)?;
    let text = String::from_utf8(bytes).context("input is not valid UTF-8")?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let mut out = String::from("TEXT\tLABEL\tPROB\n");
    for line in text.lines() {
        if line.contains('\t') {
            bail!("input lines must not contain tabs");
        }
        let p = predict(&model, line);
        writeln!(out, "{line}\t{}\t{:.6}", p.label, p.probability).expect("writing to a String");
    }
    write_output(a.out.as_ref(), out.as_bytes())?;
    Ok(Outcome::Clean)
}

/// Rows of a TSV whose header starts with `TEXT LABEL`; further columns are
/// ignored, so synthetic corpus files qualify.
fn parse_labeled(bytes: &[u8]) -> Result<Vec<(String, BinaryLabel)>> {
    let text = std::str::from_utf8(bytes).context("input is not valid UTF-8")?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header: Vec<&str> = lines.next().unwrap_or_default().split('\t').collect();
    if header.len() < 2 || header[0] != "TEXT" || header[1] != "LABEL" {
        bail!("expected a header starting with `TEXT\\tLABEL`");
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != header.len() {
            bail!("line {}: expected {} columns, found {}", i + 2, header.len(), cols.len());
        }
        let label = cols[1].parse::<BinaryLabel>().map_err(|v| anyhow!("line {}: unknown label `{v}`", i + 2))?;
        out.push((cols[0].to_owned(), label));
    }
    Ok(out)
}

#[derive(Serialize)]
struct EvaluateConfig {
    model: &'static str,
    gold: &'static str,
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<Outcome> {
    let (model, model_digest) = load(&a.model)?;
    let mut inputs: Vec<InputDigest> = model_digest.into_iter().collect();
    let (labeled, gold) = match (&a.input, &a.corpus, &a.outputs) {
        (Some(p), _, _) => {
            let (bytes, d) = read_input(p)?;
            inputs.push(d);
            (parse_labeled(&bytes).with_context(|| format!("parsing {}", p.display()))?, "label-column")
        }
        (None, Some(c), Some(o)) => {
            let (corpus, cd) = load_corpus(c)?;
            let (bytes, od) = read_input(o)?;
            inputs.extend([cd, od]);
            let outputs = parse_outputs(&bytes).with_context(|| format!("parsing outputs {}", o.display()))?;
            let sets: HashMap<&str, BinaryLabel> = corpus.entries.iter().map(|e| (e.id.as_str(), BinaryLabel::from(e.set_tag))).collect();
            let labeled = outputs
                .into_iter()
                .map(|o| {
                    let label = *sets.get(o.entry_id.as_str()).ok_or_else(|| anyhow!("output for unknown entry `{}`", o.entry_id))?;
                    Ok((o.text, label))
                })
                .collect::<Result<Vec<_>>>()?;
            (labeled, "corpus-set")
        }
        _ => bail!("give --in, or --corpus with --outputs"),
    };
    let evaluation = evaluate(&model, &labeled).map_err(|_| anyhow!("nothing to evaluate: the input has no rows"))?;
    let config = EvaluateConfig { model: if a.model.zero_model { "zero" } else { "file" }, gold };
    write_json(a.out.as_ref(), &Envelope::new("classifier evaluate", config, inputs, evaluation))?;
    Ok(Outcome::Clean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeled_tsv() {
        let rows = parse_labeled(b"TEXT\tLABEL\tSEED_ID\nciao\tM\ts1\nchi\tN\ts1\n").unwrap();
        assert_eq!(rows, vec![("ciao".into(), BinaryLabel::Gendered), ("chi".into(), BinaryLabel::Neutral)]);
        assert!(parse_labeled(b"TEXT\tLABEL\nx\tQ\n").unwrap_err().to_string().contains("`Q`"));
        assert!(parse_labeled(b"LABEL\tTEXT\n").is_err());
        assert!(parse_labeled(b"").is_err());
        assert!(parse_labeled(b"TEXT\tLABEL\nx\n").is_err());
    }
}
