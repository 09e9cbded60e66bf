//! Translation edit rate with block shifts.
//!
//! Edits are word insertions, deletions, substitutions and block shifts, each
//! costing one. Shifts are first found greedily: at every step the single
//! shift that lowers the remaining edit distance the most is applied, as long
//! as it saves more than the one edit it costs. For hypotheses of at most
//! `exact_max_len` tokens a branch-and-bound search then lowers that count to
//! the true minimum over all shift sequences within the limits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize_13a, tokenize_13a_lower};
use super::{check_shape, MetricError, MetricKind, MetricScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerConfig {
    /// Longest block (in tokens) that may be shifted.
    pub max_shift_size: usize,
    /// Largest displacement of a shifted block.
    pub max_shift_distance: usize,
    /// Cap on the number of shifts per segment.
    pub max_shifts: usize,
    pub lowercase: bool,
    /// Hypotheses up to this many tokens get an exact shift search; 0 keeps
    /// every segment greedy.
    pub exact_max_len: usize,
    /// Candidate states the exact search may evaluate before it settles for
    /// the best count found so far.
    pub exact_budget: usize,
}

impl Default for TerConfig {
    fn default() -> Self {
        TerConfig { max_shift_size: 10, max_shift_distance: 50, max_shifts: 20, lowercase: true, exact_max_len: 12, exact_budget: 200_000 }
    }
}

impl TerConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.max_shift_size == 0 && self.max_shifts > 0 {
            return Err(MetricError::InvalidConfig("ter.max_shift_size must be >= 1".into()));
        }
        Ok(())
    }

    fn tokenize(&self, text: &str) -> Vec<String> {
        if self.lowercase {
            tokenize_13a_lower(text)
        } else {
            tokenize_13a(text)
        }
    }
}

/// Edit count and reference length of one scored segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TerStats {
    pub edits: usize,
    pub shifts: usize,
    pub ref_len: usize,
}

impl TerStats {
    pub fn rate(&self) -> f64 {
        100.0 * self.edits as f64 / self.ref_len as f64
    }
}

/// Levenshtein distance over tokens with unit costs.
pub(crate) fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag } else { 1 + diag.min(up).min(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// Moves `seq[start..start + len]` so that it begins at `dest` in the result.
pub(crate) fn apply_shift<T: Clone>(seq: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut rest: Vec<T> = Vec::with_capacity(seq.len());
    rest.extend_from_slice(&seq[..start]);
    rest.extend_from_slice(&seq[start + len..]);
    let mut out = Vec::with_capacity(seq.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(&seq[start..start + len]);
    out.extend_from_slice(&rest[dest..]);
    out
}

fn occurs_in<T: PartialEq>(block: &[T], reference: &[T]) -> bool {
    reference.windows(block.len()).any(|w| w == block)
}

/// Every shifted variant of `seq` allowed by the size and distance limits.
fn shifts_of<'a, T: Clone + 'a>(seq: &'a [T], config: &'a TerConfig) -> impl Iterator<Item = Vec<T>> + 'a {
    let n = seq.len();
    (0..n).flat_map(move |start| {
        (1..=config.max_shift_size.min(n - start)).flat_map(move |len| {
            (0..=(n - len))
                .filter(move |&dest| dest != start && dest.abs_diff(start) <= config.max_shift_distance)
                .map(move |dest| apply_shift(seq, start, len, dest))
        })
    })
}

/// Greedy search: (edits, shifts). Only blocks that appear verbatim in the
/// reference are moved.
fn greedy_edits<T: Clone + PartialEq>(hyp: &[T], reference: &[T], config: &TerConfig) -> (usize, usize) {
    let mut current = hyp.to_vec();
    let mut distance = edit_distance(&current, reference);
    let mut shifts = 0;
    while shifts < config.max_shifts && distance > 1 {
        let mut best: Option<(usize, Vec<T>)> = None;
        let n = current.len();
        for start in 0..n {
            for len in 1..=config.max_shift_size.min(n - start) {
                if !occurs_in(&current[start..start + len], reference) {
                    break;
                }
                for dest in 0..=(n - len) {
                    if dest == start || dest.abs_diff(start) > config.max_shift_distance {
                        continue;
                    }
                    let candidate = apply_shift(&current, start, len, dest);
                    let d = edit_distance(&candidate, reference);
                    let threshold = best.as_ref().map_or(distance - 1, |(bd, _)| *bd);
                    if d < threshold {
                        best = Some((d, candidate));
                    }
                }
            }
        }
        match best {
            Some((d, candidate)) => {
                current = candidate;
                distance = d;
                shifts += 1;
            }
            None => break,
        }
    }
    (shifts + distance, shifts)
}

/// Shifts keep the token multiset, so every state needs at least as many
/// edits as the larger side of the multiset difference.
fn multiset_bound<T: Eq + std::hash::Hash>(hyp: &[T], reference: &[T]) -> usize {
    let mut diff: HashMap<&T, isize> = HashMap::new();
    for t in hyp {
        *diff.entry(t).or_default() += 1;
    }
    for t in reference {
        *diff.entry(t).or_default() -= 1;
    }
    let (mut extra, mut missing) = (0usize, 0usize);
    for v in diff.values() {
        if *v > 0 {
            extra += *v as usize;
        } else {
            missing += (-*v) as usize;
        }
    }
    extra.max(missing)
}

struct ExactSearch<'a, T> {
    reference: &'a [T],
    config: &'a TerConfig,
    floor: usize,
    best: (usize, usize),
    /// Fewest shifts at which each state has been expanded.
    expanded: HashMap<Vec<T>, usize>,
    evaluated: usize,
}

impl<T: Clone + Eq + std::hash::Hash> ExactSearch<'_, T> {
    /// Depth-first over shift sequences; a branch dies once `depth + 1 +
    /// floor` cannot beat the incumbent.
    fn visit(&mut self, state: Vec<T>, depth: usize) {
        if depth >= self.config.max_shifts || depth + 1 + self.floor >= self.best.0 || self.evaluated >= self.config.exact_budget {
            return;
        }
        match self.expanded.get(&state) {
            Some(&d) if d <= depth => return,
            _ => {
                self.expanded.insert(state.clone(), depth);
            }
        }
        let mut children: Vec<(usize, Vec<T>)> = shifts_of(&state, self.config)
            .map(|c| (edit_distance(&c, self.reference), c))
            .collect();
        self.evaluated += children.len();
        for (d, _) in &children {
            if depth + 1 + d < self.best.0 {
                self.best = (depth + 1 + d, depth + 1);
            }
        }
        // closest children first so the incumbent tightens early
        children.sort_by_key(|(d, _)| *d);
        for (_, child) in children {
            self.visit(child, depth + 1);
        }
    }
}

/// Number of edits (shifts included) turning `hyp` into `reference`, and
/// how many of them are shifts.
pub fn ter_edits<T: Clone + Eq + std::hash::Hash>(hyp: &[T], reference: &[T], config: &TerConfig) -> (usize, usize) {
    let greedy = greedy_edits(hyp, reference, config);
    if hyp.len() > config.exact_max_len || config.max_shifts == 0 || config.max_shift_size == 0 {
        return greedy;
    }
    let floor = multiset_bound(hyp, reference);
    let unshifted = edit_distance(hyp, reference);
    let start = if unshifted <= greedy.0 { (unshifted, 0) } else { greedy };
    let mut search = ExactSearch { reference, config, floor, best: start, expanded: HashMap::new(), evaluated: 0 };
    search.visit(hyp.to_vec(), 0);
    search.best
}

fn segment_stats(hyp: &[String], references: &[Vec<String>], segment: usize, config: &TerConfig) -> Result<TerStats, MetricError> {
    let mut best: Option<TerStats> = None;
    for (i, reference) in references.iter().enumerate() {
        if reference.is_empty() {
            return Err(MetricError::EmptyReference { segment, reference: i });
        }
        let (edits, shifts) = ter_edits(hyp, reference, config);
        let stats = TerStats { edits, shifts, ref_len: reference.len() };
        if best.map_or(true, |b| stats.rate() < b.rate()) {
            best = Some(stats);
        }
    }
    best.ok_or(MetricError::NoReferences { segment })
}

/// Sentence TER: the lowest edit rate over the references, 0-100+ scale.
pub fn ter(hypothesis: &str, references: &[String], config: &TerConfig) -> Result<MetricScore, MetricError> {
    ter_corpus(&[hypothesis], &[references], config)
}

/// Corpus TER: summed edits over summed reference lengths, each segment
/// contributing its lowest-rate reference.
pub fn ter_corpus<H, R>(hypotheses: &[H], references: &[R], config: &TerConfig) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<[String]>,
{
    config.validate()?;
    check_shape(hypotheses, references)?;
    let (mut edits, mut ref_len) = (0usize, 0usize);
    for (i, (hyp, refs)) in hypotheses.iter().zip(references).enumerate() {
        let hyp = config.tokenize(hyp.as_ref());
        let refs: Vec<Vec<String>> = refs.as_ref().iter().map(|r| config.tokenize(r)).collect();
        let stats = segment_stats(&hyp, &refs, i, config)?;
        edits += stats.edits;
        ref_len += stats.ref_len;
    }
    Ok(MetricScore::new(MetricKind::Ter, 100.0 * edits as f64 / ref_len as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn one(h: &str, r: &str) -> f64 {
        ter(h, &[r.to_string()], &TerConfig::default()).unwrap().value
    }

    #[test]
    fn identity_is_zero() {
        assert_eq!(one("il personale medico è qui", "il personale medico è qui"), 0.0);
    }

    #[test]
    fn one_substitution_in_five() {
        assert!((one("a b c d e", "a b x d e") - 20.0).abs() < 1e-12);
    }

    #[test]
    fn swapped_blocks_cost_one_shift() {
        // ref length 8; hyp swaps "c d" and "e f"
        assert!((one("a b e f c d g h", "a b c d e f g h") - 12.5).abs() < 1e-12);
        let (edits, shifts) = ter_edits(&toks("a b e f c d g h"), &toks("a b c d e f g h"), &TerConfig::default());
        assert_eq!((edits, shifts), (1, 1));
    }

    #[test]
    fn lowercases_by_default() {
        assert_eq!(one("The Cat", "the cat"), 0.0);
        let cfg = TerConfig { lowercase: false, ..TerConfig::default() };
        assert!(ter("The Cat", &["the cat".to_string()], &cfg).unwrap().value > 0.0);
    }

    #[test]
    fn empty_reference_is_an_error() {
        let err = ter("a", &[" . ".to_string(), "   ".to_string()], &TerConfig::default());
        assert_eq!(err, Err(MetricError::EmptyReference { segment: 0, reference: 1 }));
        assert!(matches!(ter("a", &["".to_string()], &TerConfig::default()), Err(MetricError::EmptyReference { .. })));
    }

    #[test]
    fn empty_hypothesis_costs_reference_length() {
        assert!((one("", "a b c") - 100.0).abs() < 1e-12);
    }

    #[test]
    fn best_reference_is_chosen() {
        let refs = vec!["x y z".to_string(), "a b c".to_string()];
        assert_eq!(ter("a b c", &refs, &TerConfig::default()).unwrap().value, 0.0);
    }

    #[test]
    fn shift_helpers() {
        let s = toks("a b c d e");
        assert_eq!(apply_shift(&s, 0, 2, 3), toks("c d e a b"));
        assert_eq!(apply_shift(&s, 3, 1, 0), toks("d a b c e"));
        assert_eq!(edit_distance(&toks("a b c"), &toks("a c")), 1);
        assert_eq!(edit_distance::<String>(&[], &toks("a c")), 2);
    }

    #[test]
    fn exact_search_beats_greedy() {
        // no single shift lowers the distance, but two shifts cost 2 < 3
        let (h, r) = (toks("d b c b a"), toks("b a c b d"));
        assert_eq!(greedy_edits(&h, &r, &TerConfig::default()), (3, 0));
        assert_eq!(ter_edits(&h, &r, &TerConfig::default()), (2, 2));
        let greedy_only = TerConfig { exact_max_len: 0, ..TerConfig::default() };
        assert_eq!(ter_edits(&h, &r, &greedy_only), (3, 0));
    }

    #[test]
    fn shift_limits_are_respected() {
        let cfg = TerConfig { max_shifts: 0, ..TerConfig::default() };
        let (edits, shifts) = ter_edits(&toks("a b e f c d g h"), &toks("a b c d e f g h"), &cfg);
        assert_eq!(shifts, 0);
        assert_eq!(edits, 4);
    }
}
