//! METEOR with staged unigram alignment.
//!
//! Each stage matches the tokens left unaligned by the previous stages. A
//! stage always aligns the maximum number of unigrams it can; among those
//! alignments the one producing the fewest chunks over the whole alignment
//! is kept. The search is an exact branch-and-bound over hypothesis
//! positions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize_13a_lower;
use super::{check_shape, MetricError, MetricKind, MetricScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStage {
    Exact,
    /// Suffix-stripped match: trailing vowels removed, at least three
    /// characters kept.
    Stem,
}

impl MatchStage {
    fn key(self, token: &str) -> String {
        match self {
            MatchStage::Exact => token.to_owned(),
            MatchStage::Stem => stem(token),
        }
    }
}

fn stem(token: &str) -> String {
    let mut chars: Vec<char> = token.chars().collect();
    while chars.len() > 3 && chars.last().is_some_and(|c| "aeiouàèéìíòóùú".contains(*c)) {
        chars.pop();
    }
    chars.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeteorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub stages: Vec<MatchStage>,
}

impl Default for MeteorParams {
    fn default() -> Self {
        MeteorParams { alpha: 0.9, beta: 3.0, gamma: 0.5, stages: vec![MatchStage::Exact] }
    }
}

impl MeteorParams {
    pub fn validate(&self) -> Result<(), MetricError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(MetricError::InvalidConfig("meteor.alpha must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(MetricError::InvalidConfig("meteor.gamma must lie in [0, 1]".into()));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(MetricError::InvalidConfig("meteor.beta must be finite and >= 0".into()));
        }
        if self.stages.is_empty() {
            return Err(MetricError::InvalidConfig("meteor.stages must not be empty".into()));
        }
        Ok(())
    }
}

/// Aligned `(hyp, ref)` token index pairs, sorted by hypothesis index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize)>,
}

impl Alignment {
    pub fn chunks(&self) -> usize {
        count_chunks(&self.pairs)
    }
}

fn count_chunks(sorted_pairs: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(h, r) in sorted_pairs {
        match prev {
            Some((ph, pr)) if h == ph + 1 && r == pr + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((h, r));
    }
    chunks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeteorStats {
    pub matches: usize,
    pub chunks: usize,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl MeteorStats {
    pub fn score(&self, params: &MeteorParams) -> f64 {
        if self.matches == 0 {
            return 0.0;
        }
        let m = self.matches as f64;
        let precision = m / self.hyp_len as f64;
        let recall = m / self.ref_len as f64;
        let fmean = precision * recall / (params.alpha * precision + (1.0 - params.alpha) * recall);
        let penalty = params.gamma * (self.chunks as f64 / m).powf(params.beta);
        fmean * (1.0 - penalty)
    }

    fn add(&mut self, other: &MeteorStats) {
        self.matches += other.matches;
        self.chunks += other.chunks;
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }
}

struct StageSearch<'a> {
    hyp_keys: &'a [Option<String>],
    /// Fixed links from earlier stages, by hypothesis index.
    fixed: &'a [Option<usize>],
    /// Remaining hypothesis occurrences of each key after position i.
    hyp_remaining_after: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    quota: HashMap<&'a str, usize>,
    used: Vec<bool>,
    current: Vec<Option<usize>>,
    best: Option<(usize, Vec<Option<usize>>)>,
    nodes: usize,
}

/// Search nodes visited per stage before the best alignment found so far is
/// accepted. Only reached on long segments with many repeated tokens.
const NODE_BUDGET: usize = 2_000_000;

impl<'a> StageSearch<'a> {
    fn new(hyp_keys: &'a [Option<String>], ref_keys: &'a [Option<String>], fixed: &'a [Option<usize>]) -> Self {
        let mut hyp_count: HashMap<&str, usize> = HashMap::new();
        let mut ref_count: HashMap<&str, usize> = HashMap::new();
        for k in hyp_keys.iter().flatten() {
            *hyp_count.entry(k).or_default() += 1;
        }
        for k in ref_keys.iter().flatten() {
            *ref_count.entry(k).or_default() += 1;
        }
        let quota: HashMap<&str, usize> = hyp_count
            .iter()
            .filter_map(|(k, &h)| ref_count.get(k).map(|&r| (*k, h.min(r))))
            .collect();

        let mut hyp_remaining_after = vec![0; hyp_keys.len()];
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for i in (0..hyp_keys.len()).rev() {
            if let Some(k) = &hyp_keys[i] {
                hyp_remaining_after[i] = seen.get(k.as_str()).copied().unwrap_or(0);
                *seen.entry(k).or_default() += 1;
            }
        }
        let candidates = hyp_keys
            .iter()
            .map(|k| match k {
                Some(k) => ref_keys
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.as_deref() == Some(k.as_str()))
                    .map(|(j, _)| j)
                    .collect(),
                None => Vec::new(),
            })
            .collect();
        let mut used = vec![false; ref_keys.len()];
        for j in fixed.iter().flatten() {
            used[*j] = true;
        }
        StageSearch {
            hyp_keys,
            fixed,
            hyp_remaining_after,
            candidates,
            quota,
            used,
            current: fixed.to_vec(),
            best: None,
            nodes: 0,
        }
    }

    fn run(mut self) -> Vec<Option<usize>> {
        self.visit(0, None, 0);
        self.best.map(|(_, links)| links).unwrap_or_else(|| self.fixed.to_vec())
    }

    fn visit(&mut self, i: usize, prev: Option<(usize, usize)>, chunks: usize) {
        self.nodes += 1;
        if let Some((best, _)) = &self.best {
            if chunks >= *best || self.nodes > NODE_BUDGET {
                return;
            }
        }
        if i == self.hyp_keys.len() {
            self.best = Some((chunks, self.current.clone()));
            return;
        }
        let step = |prev: Option<(usize, usize)>, j: usize| match prev {
            Some((ph, pr)) if ph + 1 == i && pr + 1 == j => 0,
            _ => 1,
        };
        if let Some(j) = self.fixed[i] {
            let c = chunks + step(prev, j);
            self.visit(i + 1, Some((i, j)), c);
            return;
        }
        let Some(key) = self.hyp_keys[i].as_deref() else {
            self.visit(i + 1, prev, chunks);
            return;
        };
        let left = self.quota.get(key).copied().unwrap_or(0);
        if left > 0 {
            // Continuing the current chunk first finds good bounds early.
            let mut order: Vec<usize> = self.candidates[i].iter().copied().filter(|&j| !self.used[j]).collect();
            if let Some((ph, pr)) = prev {
                if ph + 1 == i {
                    if let Some(pos) = order.iter().position(|&j| j == pr + 1) {
                        order[..=pos].rotate_right(1);
                    }
                }
            }
            for j in order {
                self.used[j] = true;
                self.current[i] = Some(j);
                *self.quota.get_mut(key).unwrap() -= 1;
                self.visit(i + 1, Some((i, j)), chunks + step(prev, j));
                *self.quota.get_mut(key).unwrap() += 1;
                self.current[i] = None;
                self.used[j] = false;
            }
        }
        // Leaving this token unaligned keeps the alignment maximal only if
        // later occurrences of the key can still fill the quota.
        if self.hyp_remaining_after[i] >= left {
            self.visit(i + 1, prev, chunks);
        }
    }
}

/// Aligns hypothesis and reference tokens stage by stage.
pub fn align(hyp: &[String], reference: &[String], stages: &[MatchStage]) -> Alignment {
    let mut links: Vec<Option<usize>> = vec![None; hyp.len()];
    for &stage in stages {
        let mut ref_taken = vec![false; reference.len()];
        for j in links.iter().flatten() {
            ref_taken[*j] = true;
        }
        let hyp_keys: Vec<Option<String>> =
            hyp.iter().zip(&links).map(|(t, l)| l.is_none().then(|| stage.key(t))).collect();
        let ref_keys: Vec<Option<String>> =
            reference.iter().zip(&ref_taken).map(|(t, taken)| (!taken).then(|| stage.key(t))).collect();
        links = StageSearch::new(&hyp_keys, &ref_keys, &links).run();
    }
    Alignment { pairs: links.iter().enumerate().filter_map(|(h, r)| r.map(|r| (h, r))).collect() }
}

fn segment_stats(hyp: &[String], reference: &[String], params: &MeteorParams) -> MeteorStats {
    let alignment = align(hyp, reference, &params.stages);
    MeteorStats { matches: alignment.pairs.len(), chunks: alignment.chunks(), hyp_len: hyp.len(), ref_len: reference.len() }
}

fn best_stats(hyp: &[String], references: &[String], params: &MeteorParams) -> MeteorStats {
    let mut best: Option<(f64, MeteorStats)> = None;
    for r in references {
        let stats = segment_stats(hyp, &tokenize_13a_lower(r), params);
        let s = stats.score(params);
        if best.map_or(true, |(b, _)| s > b) {
            best = Some((s, stats));
        }
    }
    best.map(|(_, s)| s).unwrap_or_default()
}

/// Sentence METEOR, best over references; [0, 1] scale.
pub fn meteor(hypothesis: &str, references: &[String], params: &MeteorParams) -> Result<MetricScore, MetricError> {
    meteor_corpus(&[hypothesis], &[references], params)
}

/// Corpus METEOR from summed matches, chunks and lengths; each segment uses
/// the statistics of its best-scoring reference.
pub fn meteor_corpus<H, R>(hypotheses: &[H], references: &[R], params: &MeteorParams) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<[String]>,
{
    params.validate()?;
    check_shape(hypotheses, references)?;
    let mut total = MeteorStats::default();
    for (hyp, refs) in hypotheses.iter().zip(references) {
        let hyp = tokenize_13a_lower(hyp.as_ref());
        total.add(&best_stats(&hyp, refs.as_ref(), params));
    }
    Ok(MetricScore::new(MetricKind::Meteor, total.score(params)))
}
