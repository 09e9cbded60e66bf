use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosteditError {
    #[error("substitution {index} has an empty gendered span")]
    EmptySpan { index: usize },
    #[error("span `{span}` not found in the output")]
    NotFound { span: String },
    #[error("every occurrence of span `{span}` overlaps an earlier substitution")]
    Overlapping { span: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Postedit {
    pub text: String,
    /// Whitespace tokens of the original text touched by a substitution.
    pub changed_tokens: usize,
    pub total_tokens: usize,
}

impl Postedit {
    pub fn changed_fraction(&self) -> f64 {
        if self.total_tokens == 0 {
            0.0
        } else {
            self.changed_tokens as f64 / self.total_tokens as f64
        }
    }
}

fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Replaces, for each `(gendered, neutral)` pair in order, the first
/// occurrence of `gendered` not overlapping an earlier substitution.
/// Everything outside the replaced spans is kept byte for byte; agreement
/// elsewhere in the sentence is not repaired.
pub fn apply_neutral_postedit<G, N>(text: &str, substitutions: &[(G, N)]) -> Result<Postedit, PosteditError>
where
    G: AsRef<str>,
    N: AsRef<str>,
{
    let mut claimed: Vec<(usize, usize, &str)> = Vec::new();
    for (index, (gendered, neutral)) in substitutions.iter().enumerate() {
        let gendered = gendered.as_ref();
        if gendered.is_empty() {
            return Err(PosteditError::EmptySpan { index });
        }
        let mut occurrences = text.match_indices(gendered).map(|(s, m)| (s, s + m.len())).peekable();
        if occurrences.peek().is_none() {
            return Err(PosteditError::NotFound { span: gendered.to_owned() });
        }
        let free = occurrences.find(|&(s, e)| claimed.iter().all(|&(cs, ce, _)| e <= cs || ce <= s));
        let (s, e) = free.ok_or_else(|| PosteditError::Overlapping { span: gendered.to_owned() })?;
        claimed.push((s, e, neutral.as_ref()));
    }
    claimed.sort_by_key(|&(s, _, _)| s);

    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for &(s, e, replacement) in &claimed {
        out.push_str(&text[cursor..s]);
        out.push_str(replacement);
        cursor = e;
    }
    out.push_str(&text[cursor..]);

    let tokens = token_spans(text);
    let changed_tokens = tokens.iter().filter(|&&(ts, te)| claimed.iter().any(|&(s, e, _)| ts < e && s < te)).count();
    Ok(Postedit { text: out, changed_tokens, total_tokens: tokens.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_substitution() {
        let p = apply_neutral_postedit("i vicini sono qui", &[("i vicini", "il vicinato")]).unwrap();
        assert_eq!(p.text, "il vicinato sono qui");
        assert_eq!((p.changed_tokens, p.total_tokens), (2, 4));
        assert_eq!(p.changed_fraction(), 0.5);
    }

    #[test]
    fn empty_list_is_identity() {
        let p = apply_neutral_postedit::<&str, &str>("  resta  uguale ", &[]).unwrap();
        assert_eq!(p.text, "  resta  uguale ");
        assert_eq!(p.changed_tokens, 0);
    }

    #[test]
    fn missing_span_is_named() {
        let err = apply_neutral_postedit("i vicini", &[("le vicine", "x")]).unwrap_err();
        assert_eq!(err, PosteditError::NotFound { span: "le vicine".into() });
        assert_eq!(apply_neutral_postedit("a", &[("", "x")]).unwrap_err(), PosteditError::EmptySpan { index: 0 });
    }

    #[test]
    fn repeated_spans_take_successive_occurrences() {
        let p = apply_neutral_postedit("il collega e il collega", &[("il collega", "chi collabora"), ("il collega", "l'altra persona")]).unwrap();
        assert_eq!(p.text, "chi collabora e l'altra persona");
        let err = apply_neutral_postedit("il collega", &[("il collega", "a"), ("collega", "b")]).unwrap_err();
        assert_eq!(err, PosteditError::Overlapping { span: "collega".into() });
    }

    #[test]
    fn order_of_substitutions_does_not_matter_for_disjoint_spans() {
        let a = apply_neutral_postedit("Lui è stanco e lei è stanca", &[("lei è stanca", "l'altra persona è stanca"), ("Lui è stanco", "Quella persona è stanca")]).unwrap();
        assert_eq!(a.text, "Quella persona è stanca e l'altra persona è stanca");
        assert_eq!(a.changed_tokens, 6);
    }

    #[test]
    fn partial_token_overlap_counts_the_token() {
        let p = apply_neutral_postedit("stanchi.", &[("stanchi", "affaticate")]).unwrap();
        assert_eq!(p.text, "affaticate.");
        assert_eq!(p.changed_tokens, 1);
    }
}
