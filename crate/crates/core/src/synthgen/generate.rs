use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompts::{build_round1_prompt, build_round2_prompt, parse_completion, FewShot, PromptError};
use super::{ChatClient, ClientError, HttpConfig, RetryPolicy, Round, SeedTriplet, SentenceTriplet};

#[derive(Debug, Error, PartialEq)]
pub enum GenerationError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("invalid generation config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub round1_temperature: f64,
    pub round2_temperature: f64,
    /// Round-1 sentence triplets requested per seed.
    pub sentences_per_seed: usize,
    /// Round-2 rewrites requested per round-1 triplet.
    pub rewrites_per_sentence: usize,
    /// Seeds (round 1) or triplets (round 2) per prompt.
    pub batch_size: usize,
    pub max_in_flight: usize,
    pub http: HttpConfig,
    pub retry: RetryPolicy,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            round1_temperature: 0.5,
            round2_temperature: 0.3,
            sentences_per_seed: 25,
            rewrites_per_sentence: 5,
            batch_size: 10,
            max_in_flight: 4,
            http: HttpConfig::default(),
            retry: RetryPolicy::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerationError> {
        for (name, t) in [("round1_temperature", self.round1_temperature), ("round2_temperature", self.round2_temperature)] {
            if !(0.0..=2.0).contains(&t) {
                return Err(GenerationError::Config(format!("{name} must lie in [0, 2], got {t}")));
            }
        }
        for (name, n) in [
            ("sentences_per_seed", self.sentences_per_seed),
            ("rewrites_per_sentence", self.rewrites_per_sentence),
            ("batch_size", self.batch_size),
            ("max_in_flight", self.max_in_flight),
        ] {
            if n == 0 {
                return Err(GenerationError::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundStats {
    pub requests: usize,
    pub items_requested: usize,
    pub items_parsed: usize,
    /// Requested items missing or malformed in the completion.
    pub items_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundOutput {
    pub triplets: Vec<SentenceTriplet>,
    pub stats: RoundStats,
}

/// Sends every prompt with at most `max_in_flight` in flight and returns the
/// completions in prompt order. The first failure (in prompt order among
/// those attempted) aborts the run.
fn run_prompts<C: ChatClient>(client: &C, prompts: &[String], temperature: f64, max_in_flight: usize) -> Result<Vec<String>, ClientError> {
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Result<String, ClientError>>>> = Mutex::new(vec![None; prompts.len()]);
    std::thread::scope(|scope| {
        for _ in 0..max_in_flight.min(prompts.len()) {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(prompt) = prompts.get(i) else { break };
                let r = client.complete(prompt, temperature);
                if r.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut out = Vec::with_capacity(prompts.len());
    for r in results.into_inner().unwrap() {
        match r {
            Some(Ok(text)) => out.push(text),
            Some(Err(e)) => return Err(e),
            None => unreachable!("prompts stop being issued only after a failure"),
        }
    }
    Ok(out)
}

/// Round 1: every seed is sent `sentences_per_seed` times, `batch_size`
/// seeds per prompt. Output is ordered by seed position, then pass.
pub fn generate_round1<C: ChatClient>(client: &C, seeds: &[SeedTriplet], few_shot: &[FewShot], config: &GenerationConfig) -> Result<RoundOutput, GenerationError> {
    config.validate()?;
    let mut prompts = Vec::new();
    let mut batches: Vec<(usize, &[SeedTriplet])> = Vec::new();
    for _ in 0..config.sentences_per_seed {
        for (b, chunk) in seeds.chunks(config.batch_size).enumerate() {
            prompts.push(build_round1_prompt(chunk, few_shot)?);
            batches.push((b * config.batch_size, chunk));
        }
    }
    let completions = run_prompts(client, &prompts, config.round1_temperature, config.max_in_flight)?;

    let mut stats = RoundStats { requests: prompts.len(), ..Default::default() };
    let mut keyed = Vec::new();
    for (job, ((offset, chunk), completion)) in batches.iter().zip(&completions).enumerate() {
        let parsed = parse_completion(completion);
        stats.items_requested += chunk.len();
        let mut taken = vec![false; chunk.len()];
        for item in parsed.items {
            if item.rewrite.is_some() || item.item == 0 || item.item > chunk.len() || taken[item.item - 1] {
                continue;
            }
            taken[item.item - 1] = true;
            let seed = &chunk[item.item - 1];
            let [neutral, masculine, feminine] = item.sentences;
            keyed.push(((offset + item.item - 1, job), SentenceTriplet { seed_id: seed.id.clone(), neutral, masculine, feminine, round: Round::R1 }));
        }
        let got = taken.iter().filter(|t| **t).count();
        stats.items_parsed += got;
        stats.items_skipped += chunk.len() - got;
        if got < chunk.len() {
            log::warn!("round 1 prompt {job}: {} of {} items unusable", chunk.len() - got, chunk.len());
        }
    }
    keyed.sort_by_key(|(k, _)| *k);
    Ok(RoundOutput { triplets: keyed.into_iter().map(|(_, t)| t).collect(), stats })
}

/// Round 2: each input triplet is rewritten up to `rewrites_per_sentence`
/// times. Output keeps input order, then rewrite number.
pub fn generate_round2<C: ChatClient>(client: &C, triplets: &[SentenceTriplet], config: &GenerationConfig) -> Result<RoundOutput, GenerationError> {
    config.validate()?;
    let rewrites = config.rewrites_per_sentence;
    let chunks: Vec<&[SentenceTriplet]> = triplets.chunks(config.batch_size).collect();
    let prompts = chunks.iter().map(|c| build_round2_prompt(c, rewrites)).collect::<Result<Vec<_>, _>>()?;
    let completions = run_prompts(client, &prompts, config.round2_temperature, config.max_in_flight)?;

    let mut stats = RoundStats { requests: prompts.len(), ..Default::default() };
    let mut out = Vec::new();
    for (job, (chunk, completion)) in chunks.iter().zip(&completions).enumerate() {
        let parsed = parse_completion(completion);
        stats.items_requested += chunk.len() * rewrites;
        let mut got = 0;
        for item in parsed.items {
            let Some(r) = item.rewrite else { continue };
            if item.item == 0 || item.item > chunk.len() || r == 0 || r > rewrites {
                continue;
            }
            let source = &chunk[item.item - 1];
            let [neutral, masculine, feminine] = item.sentences;
            out.push(SentenceTriplet { seed_id: source.seed_id.clone(), neutral, masculine, feminine, round: Round::R2 });
            got += 1;
        }
        stats.items_parsed += got;
        stats.items_skipped += chunk.len() * rewrites - got;
        if got < chunk.len() * rewrites {
            log::warn!("round 2 prompt {job}: {} of {} rewrites unusable", chunk.len() * rewrites - got, chunk.len() * rewrites);
        }
    }
    Ok(RoundOutput { triplets: out, stats })
}
