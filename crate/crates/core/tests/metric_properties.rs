use nevl_core::metrics::{bleu, chrf, sentence_score, tokenize_13a, MetricConfig, MetricKind};
use proptest::prelude::*;

const WORDS: &[&str] = &[
    "il", "la", "persona", "studente", "Roma", "casa", "parla", "oggi", "molto", "l'amica", "città", "perché", ",", ".", "!", "?", "e", "non", "chi",
    "lavora", "Il", "La",
];

fn sentence(min: usize, max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), min..=max).prop_map(|w| w.join(" "))
}

fn refs() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(sentence(1, 10), 1..=3)
}

fn value(kind: MetricKind, hyp: &str, refs: &[String]) -> f64 {
    sentence_score(kind, hyp, refs, &MetricConfig::default()).unwrap().value
}

/// Rotates ASCII lowercase letters by `k`; a bijection on all of Unicode.
fn rename(s: &str, k: u8) -> String {
    s.chars().map(|c| if c.is_ascii_lowercase() { (b'a' + (c as u8 - b'a' + k) % 26) as char } else { c }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_are_deterministic_and_in_range(hyp in sentence(1, 10), refs in refs()) {
        for kind in MetricKind::ALL {
            let a = value(kind, &hyp, &refs);
            prop_assert_eq!(a, value(kind, &hyp, &refs));
            match kind {
                MetricKind::Bleu | MetricKind::Chrf => prop_assert!((0.0..=100.0).contains(&a)),
                MetricKind::Ter => prop_assert!(a >= 0.0),
                MetricKind::Meteor => prop_assert!((0.0..=1.0).contains(&a)),
            }
        }
    }

    #[test]
    fn hypothesis_among_references_is_perfect(hyp in sentence(4, 10), mut refs in refs(), at in 0usize..3) {
        let at = at.min(refs.len());
        refs.insert(at, hyp.clone());
        prop_assert!((value(MetricKind::Bleu, &hyp, &refs) - 100.0).abs() < 1e-9);
        prop_assert!((value(MetricKind::Chrf, &hyp, &refs) - 100.0).abs() < 1e-9);
        prop_assert_eq!(value(MetricKind::Ter, &hyp, &refs), 0.0);
        // P = R = 1 and one chunk
        let m = tokenize_13a(&hyp).len() as f64;
        prop_assert!((value(MetricKind::Meteor, &hyp, &refs) - (1.0 - 0.5 / m.powi(3))).abs() < 1e-12);
    }

    #[test]
    fn a_substitution_never_lowers_ter(hyp in sentence(1, 10), at in any::<prop::sample::Index>()) {
        let mut toks: Vec<String> = hyp.split(' ').map(str::to_owned).collect();
        let i = at.index(toks.len());
        toks[i] = "zzz".into();
        let edited = toks.join(" ");
        prop_assert!(value(MetricKind::Ter, &edited, &[hyp.clone()]) >= value(MetricKind::Ter, &hyp, &[hyp.clone()]));
    }

    #[test]
    fn corpus_scores_ignore_segment_order(
        pairs in prop::collection::vec((sentence(1, 10), refs()), 1..8).prop_flat_map(|p| {
            let n = p.len();
            (Just(p), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let (pairs, order) = pairs;
        let (h, r): (Vec<String>, Vec<Vec<String>>) = pairs.iter().cloned().unzip();
        let (hs, rs): (Vec<String>, Vec<Vec<String>>) = order.iter().map(|&i| pairs[i].clone()).unzip();
        let cfg = MetricConfig::default();
        prop_assert!((bleu(&h, &r, &cfg.bleu).unwrap().value - bleu(&hs, &rs, &cfg.bleu).unwrap().value).abs() < 1e-9);
        prop_assert!((chrf(&h, &r, &cfg.chrf).unwrap().value - chrf(&hs, &rs, &cfg.chrf).unwrap().value).abs() < 1e-9);
    }

    #[test]
    fn chrf_ignores_alphabet_renaming(hyp in sentence(1, 10), refs in refs(), k in 1u8..26) {
        let renamed: Vec<String> = refs.iter().map(|r| rename(r, k)).collect();
        let a = value(MetricKind::Chrf, &hyp, &refs);
        let b = value(MetricKind::Chrf, &rename(&hyp, k), &renamed);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn tokenization_is_idempotent(text in "[a-zA-Z0-9 ,.!?;:'()\"$%/-]{0,40}") {
        let once = tokenize_13a(&text);
        prop_assert_eq!(tokenize_13a(&once.join(" ")), once);
    }
}
