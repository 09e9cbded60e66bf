use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use nevl_core::corpus::{extract_candidates, reference_variability, stats, validate, Candidate, CueLexicon, SetTag, ValidationOptions};
use nevl_core::metrics::BleuConfig;
use serde::Serialize;

use super::load_corpus;
use crate::config::FileConfig;
use crate::report::{read_input, write_json, Envelope};
use crate::Outcome;

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Check set balance and per-entry invariants.
    Validate(ValidateArgs),
    /// Per-set sentence counts and average lengths.
    Stats(InOut),
    /// Propose Set-G/Set-N candidates from SOURCE/TARGET segment pairs.
    Extract(ExtractArgs),
    /// Pairwise BLEU between the references of the common set.
    Variability(InOut),
}

#[derive(Debug, Args)]
pub struct InOut {
    /// Input TSV.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// JSON report path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub io: InOut,
    /// Largest allowed difference between the Set-N and Set-G sizes.
    #[arg(long)]
    pub set_tolerance: Option<usize>,
    /// Largest allowed difference between F and M counts within Set-G.
    #[arg(long)]
    pub gender_tolerance: Option<usize>,
    /// Exit 2 when there are findings.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub io: InOut,
    /// Cue table (`PATTERN CLASS HINT`); the bundled starter table otherwise.
    #[arg(long, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
}

pub fn run(cmd: CorpusCmd, file: &FileConfig) -> Result<Outcome> {
    match cmd {
        CorpusCmd::Validate(a) => cmd_validate(a, file),
        CorpusCmd::Stats(a) => {
            let (corpus, digest) = load_corpus(&a.input)?;
            write_json(a.out.as_ref(), &Envelope::new("corpus stats", serde_json::Value::Null, vec![digest], stats(&corpus)))?;
            Ok(Outcome::Clean)
        }
        CorpusCmd::Extract(a) => cmd_extract(a),
        CorpusCmd::Variability(a) => cmd_variability(a, &file.metrics.bleu),
    }
}

fn cmd_validate(a: ValidateArgs, file: &FileConfig) -> Result<Outcome> {
    let options = ValidationOptions {
        set_tolerance: a.set_tolerance.unwrap_or(file.corpus.set_tolerance),
        gender_tolerance: a.gender_tolerance.unwrap_or(file.corpus.gender_tolerance),
    };
    let (corpus, digest) = load_corpus(&a.io.input)?;
    let report = validate(&corpus, &options);
    for f in &report.findings {
        log::warn!("{}", serde_json::to_string(f)?);
    }
    write_json(a.io.out.as_ref(), &Envelope::new("corpus validate", options, vec![digest], &report))?;
    Ok(if a.strict && !report.is_valid() { Outcome::StrictFindings } else { Outcome::Clean })
}

/// Reads `SOURCE TARGET` pairs with a header row; blank lines are skipped.
fn parse_pairs(bytes: &[u8]) -> Result<Vec<(String, String)>> {
    let text = std::str::from_utf8(bytes).context("segment pairs are not valid UTF-8")?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    if lines.next() != Some("SOURCE\tTARGET") {
        bail!("expected header `SOURCE\\tTARGET`");
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        match line.split('\t').collect::<Vec<_>>().as_slice() {
            [s, t] => out.push((s.to_string(), t.to_string())),
            cols => bail!("line {}: expected 2 columns, found {}", i + 2, cols.len()),
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ExtractResult {
    segments: usize,
    proposed_set_g: usize,
    proposed_set_n: usize,
    candidates: Vec<Candidate>,
}

#[derive(Serialize)]
struct ExtractConfig {
    lexicon: String,
}

fn cmd_extract(a: ExtractArgs) -> Result<Outcome> {
    let (bytes, digest) = read_input(&a.io.input)?;
    let pairs = parse_pairs(&bytes).with_context(|| format!("parsing {}", a.io.input.display()))?;
    let mut inputs = vec![digest];
    let lexicon = match &a.lexicon {
        Some(p) => {
            let (bytes, digest) = read_input(p)?;
            inputs.push(digest);
            let text = String::from_utf8(bytes).context("lexicon is not valid UTF-8")?;
            CueLexicon::parse(&text).with_context(|| format!("parsing lexicon {}", p.display()))?
        }
        None => CueLexicon::starter(),
    };
    let candidates = extract_candidates(&pairs, &lexicon)?;
    let count = |s: SetTag| candidates.iter().filter(|c| c.proposed == s).count();
    let result = ExtractResult { segments: pairs.len(), proposed_set_g: count(SetTag::SetG), proposed_set_n: count(SetTag::SetN), candidates };
    let config = ExtractConfig { lexicon: a.lexicon.as_deref().map(Path::display).map(|d| d.to_string()).unwrap_or_else(|| "bundled".into()) };
    write_json(a.io.out.as_ref(), &Envelope::new("corpus extract", config, inputs, result))?;
    Ok(Outcome::Clean)
}

fn cmd_variability(a: InOut, bleu: &BleuConfig) -> Result<Outcome> {
    let (corpus, digest) = load_corpus(&a.input)?;
    let common = corpus.common_set();
    if common.is_empty() {
        bail!("corpus has no common-set entries");
    }
    let matrices = reference_variability(&common, bleu)?;
    write_json(a.out.as_ref(), &Envelope::new("corpus variability", bleu, vec![digest], matrices))?;
    Ok(Outcome::Clean)
}
