use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize_13a;
use super::{check_shape, MetricError, MetricKind, MetricScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tokenizer {
    #[serde(rename = "13a")]
    Tok13a,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    /// Zero-match orders get `1 / (2^k * total)`, k counting zero orders so far.
    Exp,
    None,
}

/// BLEU settings; the defaults give the `c:mixed|e:no|tok:13a|s:exp` signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BleuConfig {
    pub max_order: usize,
    pub tokenizer: Tokenizer,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { max_order: 4, tokenizer: Tokenizer::Tok13a, smoothing: Smoothing::Exp }
    }
}

impl BleuConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.max_order == 0 {
            return Err(MetricError::InvalidConfig("bleu.max_order must be >= 1".into()));
        }
        Ok(())
    }

    /// sacreBLEU-style signature string.
    pub fn signature(&self) -> String {
        let smooth = match self.smoothing {
            Smoothing::Exp => "exp",
            Smoothing::None => "none",
        };
        format!("#:1|c:mixed|e:no|tok:13a|s:{smooth}|n:{}", self.max_order)
    }
}

/// Sufficient statistics for BLEU; corpus scores sum these over segments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub hyp_len: usize,
    pub ref_len: usize,
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
}

impl BleuStats {
    fn zero(max_order: usize) -> Self {
        BleuStats { hyp_len: 0, ref_len: 0, matches: vec![0; max_order], totals: vec![0; max_order] }
    }

    fn add(&mut self, other: &BleuStats) {
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
    }

    /// Collects clipped n-gram matches of one hypothesis against its references.
    pub fn segment(hyp: &[String], refs: &[Vec<String>], max_order: usize) -> Self {
        let mut stats = BleuStats::zero(max_order);
        stats.hyp_len = hyp.len();
        stats.ref_len = closest_ref_len(hyp.len(), refs.iter().map(Vec::len));

        let mut max_ref_counts: HashMap<&[String], usize> = HashMap::new();
        for r in refs {
            for (gram, count) in ngram_counts(r, max_order) {
                let slot = max_ref_counts.entry(gram).or_insert(0);
                *slot = (*slot).max(count);
            }
        }
        for (gram, count) in ngram_counts(hyp, max_order) {
            let n = gram.len();
            let clip = max_ref_counts.get(gram).copied().unwrap_or(0);
            stats.matches[n - 1] += count.min(clip);
        }
        for n in 1..=max_order {
            stats.totals[n - 1] = hyp.len().saturating_sub(n - 1);
        }
        stats
    }

    /// BLEU on the 0-100 scale.
    pub fn score(&self, smoothing: Smoothing) -> f64 {
        let brevity = if self.hyp_len < self.ref_len {
            if self.hyp_len == 0 {
                0.0
            } else {
                (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
            }
        } else {
            1.0
        };
        let order = self.matches.len();
        let mut log_sum = 0.0;
        let mut zero_orders = 0u32;
        for n in 0..order {
            let total = self.totals[n];
            if total == 0 {
                return 0.0;
            }
            let precision = if self.matches[n] > 0 {
                self.matches[n] as f64 / total as f64
            } else {
                match smoothing {
                    Smoothing::Exp => {
                        zero_orders += 1;
                        1.0 / (2f64.powi(zero_orders as i32) * total as f64)
                    }
                    Smoothing::None => return 0.0,
                }
            };
            log_sum += precision.ln();
        }
        100.0 * brevity * (log_sum / order as f64).exp()
    }
}

/// Closest reference length; ties go to the shorter reference.
fn closest_ref_len(hyp_len: usize, ref_lens: impl Iterator<Item = usize>) -> usize {
    let mut best: Option<(usize, usize)> = None;
    for len in ref_lens {
        let diff = hyp_len.abs_diff(len);
        best = match best {
            Some((d, l)) if d < diff || (d == diff && l <= len) => Some((d, l)),
            _ => Some((diff, len)),
        };
    }
    best.map(|(_, l)| l).unwrap_or(0)
}

fn ngram_counts(tokens: &[String], max_order: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for n in 1..=max_order.min(tokens.len()) {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU: clipped matches and totals are summed over all segments
/// before the precisions are combined.
pub fn bleu<H, R>(hypotheses: &[H], references: &[R], config: &BleuConfig) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<[String]>,
{
    config.validate()?;
    check_shape(hypotheses, references)?;
    let mut total = BleuStats::zero(config.max_order);
    for (hyp, refs) in hypotheses.iter().zip(references) {
        let hyp = tokenize_13a(hyp.as_ref());
        let refs: Vec<Vec<String>> = refs.as_ref().iter().map(|r| tokenize_13a(r)).collect();
        total.add(&BleuStats::segment(&hyp, &refs, config.max_order));
    }
    Ok(MetricScore::new(MetricKind::Bleu, total.score(config.smoothing)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn refs(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn one(h: &str, r: &[&str]) -> f64 {
        bleu(&[h], &[refs(r)], &BleuConfig::default()).unwrap().value
    }

    #[test]
    fn identity_is_perfect() {
        assert!((one("the cat sat on the mat", &["the cat sat on the mat"]) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_sentence_gets_smoothed_score() {
        // p_n = 1/(2*4), 1/(4*3), 1/(8*2), 1/(16*1); BP = 1
        let expected = 100.0 * ((1.0f64 / 8.0) * (1.0 / 12.0) * (1.0 / 16.0) * (1.0 / 16.0)).powf(0.25);
        let got = one("a b c d", &["e f g h"]);
        assert!(got > 0.0);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(got / 100.0 < 1.0);
    }

    #[test]
    fn no_smoothing_zeroes_missing_orders() {
        let cfg = BleuConfig { smoothing: Smoothing::None, ..BleuConfig::default() };
        let s = bleu(&["a b c d"], &[refs(&["a b x d"])], &cfg).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn short_hypothesis_has_no_high_orders() {
        assert_eq!(one("a b c", &["a b d"]), 0.0);
    }

    #[test]
    fn closest_length_prefers_shorter_on_tie() {
        assert_eq!(closest_ref_len(5, [7, 3].into_iter()), 3);
        assert_eq!(closest_ref_len(5, [3, 7].into_iter()), 3);
        assert_eq!(closest_ref_len(5, [9, 6, 4].into_iter()), 4);
    }

    #[test]
    fn brevity_penalty_applies() {
        let s = one("a b c d", &["a b c d e f g h"]);
        let expected = 100.0 * (1.0f64 - 2.0).exp();
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_order() {
        let cfg = BleuConfig { max_order: 0, ..BleuConfig::default() };
        assert!(bleu(&["a"], &[refs(&["a"])], &cfg).is_err());
    }
}
