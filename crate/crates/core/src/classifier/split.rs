use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::synthgen::{SeedTriplet, SyntheticExample};

/// Splits into (train, held-out) by key: `ceil(fraction * keys)` shuffled
/// keys are held out, at least one and never all when there are two or
/// more. Every key lands on exactly one side; input order is kept.
pub fn split_by_key<T, K: Ord + Clone + std::hash::Hash>(items: Vec<T>, key: impl Fn(usize, &T) -> K, heldout_fraction: f64, rng_seed: u64) -> (Vec<T>, Vec<T>) {
    let keys: Vec<K> = items.iter().enumerate().map(|(i, t)| key(i, t)).collect();
    let mut distinct: Vec<K> = keys.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    distinct.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));
    let mut k = (heldout_fraction.clamp(0.0, 1.0) * distinct.len() as f64).ceil() as usize;
    if distinct.len() >= 2 {
        k = k.clamp(1, distinct.len() - 1);
    }
    let held: HashSet<K> = distinct.into_iter().take(k).collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (item, key) in items.into_iter().zip(keys) {
        if held.contains(&key) {
            test.push(item);
        } else {
            train.push(item);
        }
    }
    (train, test)
}

/// Held-out split at the lemma level: every seed group (the lemma shared by
/// a seed's morphological variants) lands on one side. Examples with an
/// unknown seed id form a group of their own.
pub fn split_by_seed_group(examples: Vec<SyntheticExample>, seeds: &[SeedTriplet], heldout_fraction: f64, rng_seed: u64) -> (Vec<SyntheticExample>, Vec<SyntheticExample>) {
    let group_of: HashMap<&str, &str> = seeds.iter().map(|s| (s.id.as_str(), s.group())).collect();
    split_by_key(examples, |_, e| group_of.get(e.seed_id.as_str()).copied().unwrap_or(e.seed_id.as_str()).to_owned(), heldout_fraction, rng_seed)
}

/// Held-out split at the triplet level for generator output, where each
/// consecutive N, M, F run is one triplet: the three sentences stay
/// together, and held-out sentences whose text also occurs in training
/// are dropped so nothing is scored that was trained on verbatim.
pub fn split_by_triplet(examples: Vec<SyntheticExample>, heldout_fraction: f64, rng_seed: u64) -> (Vec<SyntheticExample>, Vec<SyntheticExample>) {
    let (train, test) = split_by_key(examples, |i, _| i / 3, heldout_fraction, rng_seed);
    let seen: HashSet<&str> = train.iter().map(|e| e.text.as_str()).collect();
    let test = test.into_iter().filter(|e| !seen.contains(e.text.as_str())).collect();
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{offline_generate, SeedLexicon, TemplateBank};

    #[test]
    fn groups_never_straddle_the_split() {
        let lex = SeedLexicon::bundled();
        let ex = offline_generate(&lex.seeds, 2, 3, &TemplateBank::bundled()).unwrap();
        let n = ex.len();
        let (train, test) = split_by_seed_group(ex, &lex.seeds, 0.2, 9);
        assert_eq!(train.len() + test.len(), n);
        let groups = |v: &[SyntheticExample]| -> HashSet<String> {
            v.iter().map(|e| lex.seeds.iter().find(|s| s.id == e.seed_id).unwrap().group().to_owned()).collect()
        };
        let (gt, gh) = (groups(&train), groups(&test));
        assert!(gt.is_disjoint(&gh));
        assert_eq!(gh.len(), (0.2f64 * 158.0).ceil() as usize);
    }

    #[test]
    fn triplets_stay_together_and_duplicates_are_dropped() {
        let lex = SeedLexicon::bundled();
        let ex = offline_generate(&lex.seeds[..20], 30, 3, &TemplateBank::bundled()).unwrap();
        let (train, test) = split_by_triplet(ex.clone(), 0.25, 4);
        let train_texts: HashSet<&str> = train.iter().map(|e| e.text.as_str()).collect();
        assert!(test.iter().all(|e| !train_texts.contains(e.text.as_str())));
        // 30 draws from ~40 frames repeat, so some held-out triplets are dropped
        assert!(test.len() < ex.len() / 4 && !test.is_empty());
        assert_eq!(train.len(), ex.len() - (ex.len() / 3).div_ceil(4) * 3);
    }

    #[test]
    fn deterministic() {
        let lex = SeedLexicon::bundled();
        let ex = offline_generate(&lex.seeds, 1, 3, &TemplateBank::bundled()).unwrap();
        assert_eq!(split_by_seed_group(ex.clone(), &lex.seeds, 0.3, 1), split_by_seed_group(ex.clone(), &lex.seeds, 0.3, 1));
        assert_eq!(split_by_triplet(ex.clone(), 0.3, 1), split_by_triplet(ex, 0.3, 1));
    }
}
