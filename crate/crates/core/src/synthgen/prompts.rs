//! Prompt templates for both generation rounds and the completion parser.
//!
//! Answers are requested as numbered lines `<item>. N: <sentence>` (round 1)
//! or `<item>.<rewrite>. N: <sentence>` (round 2), one line per form, so a
//! completion parses without guessing.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use super::{SeedTriplet, SentenceTriplet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("prompt batch is empty")]
    EmptyBatch,
    #[error("at least one few-shot example is required")]
    NoFewShot,
    #[error("rewrites per sentence must be at least 1")]
    NoRewrites,
}

/// A worked example: seed forms and the sentence triplet built from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShot {
    pub seeds: [String; 3],
    pub sentences: [String; 3],
}

pub fn default_few_shot() -> Vec<FewShot> {
    let shot = |seeds: [&str; 3], sentences: [&str; 3]| FewShot { seeds: seeds.map(str::to_owned), sentences: sentences.map(str::to_owned) };
    vec![
        shot(
            ["il personale impiegato", "l'impiegato", "l'impiegata"],
            [
                "Il personale impiegato ha chiesto un aumento di stipendio.",
                "L'impiegato ha chiesto un aumento di stipendio.",
                "L'impiegata ha chiesto un aumento di stipendio.",
            ],
        ),
        shot(
            ["chi insegna", "i professori", "le professoresse"],
            [
                "Abbiamo ringraziato chi insegna per la pazienza.",
                "Abbiamo ringraziato i professori per la pazienza.",
                "Abbiamo ringraziato le professoresse per la pazienza.",
            ],
        ),
    ]
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const FORMAT_R1: &str = "<number>. N: <sentence with the neutral seed>\n<number>. M: <sentence with the masculine seed>\n<number>. F: <sentence with the feminine seed>";

/// Round-1 prompt: instructions, worked examples, then one numbered request
/// line per seed triplet.
pub fn build_round1_prompt(batch: &[SeedTriplet], few_shot: &[FewShot]) -> Result<String, PromptError> {
    if batch.is_empty() {
        return Err(PromptError::EmptyBatch);
    }
    if few_shot.is_empty() {
        return Err(PromptError::NoFewShot);
    }
    let mut p = String::new();
    p.push_str(
        "You will receive triplets of Italian seed words referring to people: a gender-neutral form (N), \
         a masculine form (M) and a feminine form (F).\n\
         For each triplet write three Italian sentences, one per form. The three sentences must be identical \
         except for the seed words, which must appear exactly as given.\n\
         Answer with three lines per triplet and nothing else:\n",
    );
    p.push_str(FORMAT_R1);
    p.push_str("\n\nExamples:\n");
    for (i, ex) in few_shot.iter().enumerate() {
        let n = i + 1;
        let _ = writeln!(p, "Seeds: N = {} | M = {} | F = {}", one_line(&ex.seeds[0]), one_line(&ex.seeds[1]), one_line(&ex.seeds[2]));
        for (tag, s) in ["N", "M", "F"].iter().zip(&ex.sentences) {
            let _ = writeln!(p, "{n}. {tag}: {}", one_line(s));
        }
    }
    p.push_str("\nTriplets:\n");
    for (i, s) in batch.iter().enumerate() {
        let _ = writeln!(p, "Triplet {}: N = {} | M = {} | F = {}", i + 1, one_line(&s.neutral), one_line(&s.masculine), one_line(&s.feminine));
    }
    Ok(p)
}

/// Round-2 prompt: each numbered sentence triplet is to be rewritten
/// `rewrites` times with added context, keeping the seed words.
pub fn build_round2_prompt(batch: &[SentenceTriplet], rewrites: usize) -> Result<String, PromptError> {
    if batch.is_empty() {
        return Err(PromptError::EmptyBatch);
    }
    if rewrites == 0 {
        return Err(PromptError::NoRewrites);
    }
    let mut p = String::new();
    let _ = write!(
        p,
        "You will receive triplets of Italian sentences that differ only in the words referring to people: \
         gender-neutral (N), masculine (M) and feminine (F).\n\
         Rewrite each triplet {rewrites} times in different forms, adding context to make the sentences longer and more varied. \
         Keep the words referring to people exactly as they are, and keep the three sentences of a rewrite identical except for those words.\n\
         Answer with three lines per rewrite and nothing else, numbering rewrites <triplet>.<rewrite>:\n\
         <triplet>.<rewrite>. N: <sentence>\n<triplet>.<rewrite>. M: <sentence>\n<triplet>.<rewrite>. F: <sentence>\n\n\
         Example answer line: 1.2. F: L'impiegata ha chiesto un aumento di stipendio dopo la riunione di ieri.\n\nTriplets:\n"
    );
    for (i, t) in batch.iter().enumerate() {
        let _ = writeln!(p, "Triplet {}: N = {} | M = {} | F = {}", i + 1, one_line(&t.neutral), one_line(&t.masculine), one_line(&t.feminine));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedItem {
    pub item: usize,
    pub rewrite: Option<usize>,
    pub sentences: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedCompletion {
    pub items: Vec<ParsedItem>,
    /// Numbered items with some but not all three lines.
    pub incomplete: usize,
}

fn line_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(\d+)(?:\.(\d+))?\s*[.)]?\s*([NMF])\s*:\s*(.*\S)\s*$").unwrap())
}

/// Collects numbered `N:`/`M:`/`F:` lines into complete triplets, in item
/// order. Unnumbered lines are ignored; the first line wins on repeats.
pub fn parse_completion(text: &str) -> ParsedCompletion {
    let mut slots: BTreeMap<(usize, Option<usize>), [Option<String>; 3]> = BTreeMap::new();
    for line in text.lines() {
        let Some(c) = line_pattern().captures(line) else { continue };
        let Ok(item) = c[1].parse::<usize>() else { continue };
        let rewrite = c.get(2).and_then(|m| m.as_str().parse().ok());
        let idx = match &c[3] {
            "N" => 0,
            "M" => 1,
            _ => 2,
        };
        let slot = &mut slots.entry((item, rewrite)).or_default()[idx];
        if slot.is_none() {
            *slot = Some(c[4].to_owned());
        }
    }
    let mut out = ParsedCompletion::default();
    for ((item, rewrite), [n, m, f]) in slots {
        match (n, m, f) {
            (Some(n), Some(m), Some(f)) => out.items.push(ParsedItem { item, rewrite, sentences: [n, m, f] }),
            _ => out.incomplete += 1,
        }
    }
    out
}
