use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusEntry, SetTag};

fn punctuation_only() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\p{P}+$").unwrap())
}

/// Whitespace tokens, ignoring tokens made only of punctuation.
pub fn content_token_count(text: &str) -> usize {
    text.split_whitespace().filter(|t| !punctuation_only().is_match(t)).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetStats {
    pub sentences: usize,
    pub neutral_refs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_source_len: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_ref_g_len: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_neutral_ref_len: Option<f64>,
    /// Gendered words neutralized in REF-N, when annotated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gendered_words: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    #[serde(rename = "Set-N")]
    pub set_n: SetStats,
    #[serde(rename = "Set-G")]
    pub set_g: SetStats,
}

impl CorpusStats {
    pub fn get(&self, set: SetTag) -> &SetStats {
        match set {
            SetTag::SetN => &self.set_n,
            SetTag::SetG => &self.set_g,
        }
    }
}

fn mean(values: impl Iterator<Item = usize>) -> Option<f64> {
    let (sum, n) = values.fold((0usize, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

fn set_stats(entries: &[&CorpusEntry]) -> SetStats {
    let entries = entries.iter().copied();
    SetStats {
        sentences: entries.len(),
        neutral_refs: entries.clone().map(|e| e.neutral_refs.len()).sum(),
        avg_source_len: mean(entries.clone().map(|e| content_token_count(&e.source))),
        avg_ref_g_len: mean(entries.clone().map(|e| content_token_count(&e.ref_g))),
        avg_neutral_ref_len: mean(entries.flat_map(|e| e.neutral_refs.iter().map(|r| content_token_count(r)))),
        gendered_words: None,
    }
}

/// Per-set sentence counts and average lengths, punctuation ignored.
pub fn stats(corpus: &Corpus) -> CorpusStats {
    let of = |set| set_stats(&corpus.by_set(set).collect::<Vec<_>>());
    CorpusStats { set_n: of(SetTag::SetN), set_g: of(SetTag::SetG) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::GenderCategory;

    fn entry(id: &str, source: &str, category: GenderCategory) -> CorpusEntry {
        CorpusEntry {
            id: id.into(),
            set_tag: category.set_tag(),
            category,
            common_set: false,
            source: source.into(),
            ref_g: "Ciao , mondo !".into(),
            neutral_refs: vec!["Salve a tutte le persone .".into()],
        }
    }

    #[test]
    fn punctuation_tokens_are_ignored() {
        assert_eq!(content_token_count("Hello , world ."), 2);
        assert_eq!(content_token_count("  Hello , world .  "), 2);
        assert_eq!(content_token_count("« Sì » — disse…"), 2);
        assert_eq!(content_token_count("world."), 1);
    }

    #[test]
    fn empty_set_has_no_averages() {
        let c = Corpus::new("t", vec![entry("a", "Hello , world .", GenderCategory::Neutral)]);
        let s = stats(&c);
        assert_eq!(s.set_n.sentences, 1);
        assert_eq!(s.set_n.avg_source_len, Some(2.0));
        assert_eq!(s.set_n.avg_ref_g_len, Some(2.0));
        assert_eq!(s.set_n.avg_neutral_ref_len, Some(5.0));
        assert_eq!(s.set_g.sentences, 0);
        assert_eq!(s.set_g.avg_source_len, None);
    }

    #[test]
    fn averages_are_per_set() {
        let c = Corpus::new(
            "t",
            vec![
                entry("a", "one two three", GenderCategory::Neutral),
                entry("b", "one", GenderCategory::Neutral),
                entry("c", "x y", GenderCategory::Feminine),
            ],
        );
        let s = stats(&c);
        assert_eq!(s.set_n.avg_source_len, Some(2.0));
        assert_eq!(s.set_g.avg_source_len, Some(2.0));
        assert_eq!(s.set_g.sentences, 1);
    }
}
