use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{check_shape, MetricError, MetricKind, MetricScore};

/// chrF settings. Only plain character chrF is supported (`word_order` 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChrfConfig {
    pub char_order: usize,
    pub word_order: usize,
    pub beta: f64,
    pub strip_whitespace: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig { char_order: 6, word_order: 0, beta: 2.0, strip_whitespace: true }
    }
}

impl ChrfConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.char_order == 0 {
            return Err(MetricError::InvalidConfig("chrf.char_order must be >= 1".into()));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(MetricError::InvalidConfig("chrf.beta must be > 0".into()));
        }
        if self.word_order != 0 {
            return Err(MetricError::InvalidConfig("chrf.word_order must be 0 (word n-grams are not supported)".into()));
        }
        Ok(())
    }
}

/// Per-order `(hyp, ref, match)` character n-gram counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChrfStats {
    pub orders: Vec<[usize; 3]>,
}

impl ChrfStats {
    fn zero(order: usize) -> Self {
        ChrfStats { orders: vec![[0; 3]; order] }
    }

    fn add(&mut self, other: &ChrfStats) {
        for (a, b) in self.orders.iter_mut().zip(&other.orders) {
            for i in 0..3 {
                a[i] += b[i];
            }
        }
    }

    /// F-beta over the precision and recall averaged across the orders that
    /// have both hypothesis and reference n-grams. 0-100 scale.
    pub fn score(&self, beta: f64) -> f64 {
        let factor = beta * beta;
        let (mut prec, mut rec, mut effective) = (0.0, 0.0, 0usize);
        for &[hyp, reference, matched] in &self.orders {
            if hyp > 0 && reference > 0 {
                prec += matched as f64 / hyp as f64;
                rec += matched as f64 / reference as f64;
                effective += 1;
            }
        }
        if effective == 0 {
            return 0.0;
        }
        prec /= effective as f64;
        rec /= effective as f64;
        if prec + rec == 0.0 {
            return 0.0;
        }
        100.0 * (1.0 + factor) * prec * rec / (factor * prec + rec)
    }
}

fn prepare(text: &str, strip_whitespace: bool) -> Vec<char> {
    if strip_whitespace {
        text.chars().filter(|c| !c.is_whitespace()).collect()
    } else {
        text.chars().collect()
    }
}

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for gram in chars.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn segment_against(hyp: &[char], reference: &[char], order: usize) -> ChrfStats {
    let mut stats = ChrfStats::zero(order);
    for n in 1..=order {
        let h = char_ngrams(hyp, n);
        let r = char_ngrams(reference, n);
        let matched: usize = h.iter().map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0))).sum();
        stats.orders[n - 1] = [hyp.len().saturating_sub(n - 1), reference.len().saturating_sub(n - 1), matched];
    }
    stats
}

/// chrF. With several references, each segment contributes the statistics of
/// its best-scoring reference (first wins on ties).
pub fn chrf<H, R>(hypotheses: &[H], references: &[R], config: &ChrfConfig) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<[String]>,
{
    config.validate()?;
    check_shape(hypotheses, references)?;
    let mut total = ChrfStats::zero(config.char_order);
    for (hyp, refs) in hypotheses.iter().zip(references) {
        let hyp = prepare(hyp.as_ref(), config.strip_whitespace);
        let mut best: Option<(f64, ChrfStats)> = None;
        for r in refs.as_ref() {
            let r = prepare(r, config.strip_whitespace);
            let stats = segment_against(&hyp, &r, config.char_order);
            let f = stats.score(config.beta);
            if best.as_ref().map_or(true, |(b, _)| f > *b) {
                best = Some((f, stats));
            }
        }
        if let Some((_, stats)) = best {
            total.add(&stats);
        }
    }
    Ok(MetricScore::new(MetricKind::Chrf, total.score(config.beta)))
}
