use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use nevl_core::corpus::GenderCategory;
use nevl_core::synthgen::{
    default_few_shot, generate_round1, generate_round2, load_seed_lexicon, offline_generate, validate_all, write_synthetic, HttpChatClient, Round, RoundStats,
    RetryingClient, SeedLexicon, SyntheticExample, TemplateBank,
};
use serde::Serialize;

use crate::config::{FileConfig, SynthSection};
use crate::report::{read_input, write_json, write_output, Envelope, InputDigest};
use crate::Outcome;

#[derive(Debug, Subcommand)]
pub enum SynthCmd {
    /// Generate labeled N/M/F sentences from seed triplets.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Fill sentence frames locally and deterministically (the default).
    #[arg(long, conflicts_with = "online")]
    pub offline: bool,
    /// Prompt a chat-completion endpoint; the bearer token is read from the
    /// NEVL_API_TOKEN environment variable only.
    #[arg(long)]
    pub online: bool,
    /// Seed lexicon TSV; the bundled lexicon otherwise.
    #[arg(long, value_name = "PATH")]
    pub seeds: Option<PathBuf>,
    /// Sentence frames, one per line with a `{SEED}` slot (offline only).
    #[arg(long, value_name = "PATH")]
    pub frames: Option<PathBuf>,
    /// Triplets per seed (round 1 when online).
    #[arg(long)]
    pub per_seed: Option<usize>,
    /// Generator seed (offline only).
    #[arg(long)]
    pub rng: Option<u64>,
    /// Chat-completion URL (online only).
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Model name sent with each request (online only).
    #[arg(long)]
    pub model_name: Option<String>,
    /// Skip the rewriting round (online only).
    #[arg(long)]
    pub no_round2: bool,
    /// Also write examples that failed validation (VALID = 0).
    #[arg(long)]
    pub keep_invalid: bool,
    /// Synthetic corpus TSV.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// JSON generation report; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    mode: &'static str,
    keep_invalid: bool,
    synth: &'a SynthSection,
}

#[derive(Debug, Default, Serialize)]
struct RoundReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    client: Option<RoundStats>,
    sentences: usize,
    valid: usize,
}

#[derive(Debug, Serialize)]
struct GenerationReport {
    seeds: usize,
    duplicate_seeds: usize,
    /// Sentences asked for: three per requested triplet.
    requested: usize,
    /// Sentences returned before validation.
    produced: usize,
    dropped_invalid: usize,
    written: usize,
    /// Written sentences per label.
    per_category: BTreeMap<GenderCategory, usize>,
    per_round: BTreeMap<Round, RoundReport>,
}

fn resolve(a: &GenerateArgs, file: &FileConfig) -> SynthSection {
    let mut s = file.synth.clone();
    if let Some(n) = a.per_seed {
        s.per_seed = n;
        s.generation.sentences_per_seed = n;
    }
    if let Some(r) = a.rng {
        s.rng = r;
    }
    if let Some(e) = &a.endpoint {
        s.generation.http.endpoint = e.clone();
    }
    if let Some(m) = &a.model_name {
        s.generation.http.model = m.clone();
    }
    if a.no_round2 {
        s.round2 = false;
    }
    s
}

pub fn run(cmd: SynthCmd, file: &FileConfig) -> Result<Outcome> {
    let SynthCmd::Generate(a) = cmd;
    let mut synth = resolve(&a, file);
    let mut inputs: Vec<InputDigest> = Vec::new();
    let lexicon = match &a.seeds {
        Some(p) => {
            let (bytes, d) = read_input(p)?;
            inputs.push(d);
            load_seed_lexicon(&bytes).with_context(|| format!("parsing seeds {}", p.display()))?
        }
        None => SeedLexicon::bundled(),
    };

    let (examples, requested, client_stats) = if a.online {
        if a.per_seed.is_none() {
            synth.per_seed = synth.generation.sentences_per_seed;
        }
        synth.generation.validate()?;
        let client = RetryingClient::new(HttpChatClient::new(synth.generation.http.clone())?, synth.generation.retry);
        let r1 = generate_round1(&client, &lexicon.seeds, &default_few_shot(), &synth.generation)?;
        let mut stats = vec![(Round::R1, r1.stats)];
        let mut triplets = r1.triplets;
        if synth.round2 && !triplets.is_empty() {
            let r2 = generate_round2(&client, &triplets, &synth.generation)?;
            stats.push((Round::R2, r2.stats));
            triplets.extend(r2.triplets);
        }
        let requested = stats.iter().map(|(_, s)| 3 * s.items_requested).sum();
        let examples: Vec<SyntheticExample> = triplets.iter().flat_map(|t| t.examples()).collect();
        (validate_all(examples, &lexicon.seeds), requested, stats)
    } else {
        let bank = match &a.frames {
            Some(p) => {
                let (bytes, d) = read_input(p)?;
                inputs.push(d);
                let text = String::from_utf8(bytes).context("frames are not valid UTF-8")?;
                TemplateBank::parse(&text).with_context(|| format!("parsing frames {}", p.display()))?
            }
            None => TemplateBank::bundled(),
        };
        let examples = offline_generate(&lexicon.seeds, synth.per_seed, synth.rng, &bank)?;
        // frames are trusted but user-supplied; validation is still the gate
        let examples = validate_all(examples, &lexicon.seeds);
        (examples, 3 * synth.per_seed * lexicon.seeds.len(), Vec::new())
    };

    let mut per_round: BTreeMap<Round, RoundReport> = BTreeMap::new();
    for (round, s) in client_stats {
        per_round.entry(round).or_default().client = Some(s);
    }
    for e in &examples {
        let r = per_round.entry(e.round).or_default();
        r.sentences += 1;
        r.valid += e.valid as usize;
    }
    let produced = examples.len();
    let kept: Vec<SyntheticExample> = examples.into_iter().filter(|e| e.valid || a.keep_invalid).collect();
    let dropped_invalid = produced - kept.len();
    let mut per_category = BTreeMap::new();
    for e in &kept {
        *per_category.entry(e.label).or_insert(0) += 1;
    }

    let mut tsv = Vec::new();
    write_synthetic(&mut tsv, &kept)?;
    write_output(Some(&a.out), &tsv)?;
    let report = GenerationReport {
        seeds: lexicon.seeds.len(),
        duplicate_seeds: lexicon.duplicates,
        requested,
        produced,
        dropped_invalid,
        written: kept.len(),
        per_category,
        per_round,
    };
    let config = ResolvedConfig { mode: if a.online { "online" } else { "offline" }, keep_invalid: a.keep_invalid, synth: &synth };
    write_json(a.report.as_ref(), &Envelope::new("synth generate", config, inputs, report))?;
    Ok(Outcome::Clean)
}
