use std::collections::HashMap;

use super::{SeedTriplet, SyntheticExample};
use crate::corpus::GenderCategory;

const LABELS: [GenderCategory; 3] = [GenderCategory::Neutral, GenderCategory::Masculine, GenderCategory::Feminine];

/// Case-insensitive occurrence of `form` in `text` not flanked by a letter
/// or digit on either side.
pub fn contains_form(text: &str, form: &str) -> bool {
    let text = text.to_lowercase();
    let form = form.to_lowercase();
    if form.is_empty() {
        return false;
    }
    text.match_indices(&form).any(|(start, m)| {
        let before = text[..start].chars().next_back();
        let after = text[start + m.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}

/// Marks `example` valid iff it contains its label's seed form and neither
/// of the other two forms. Paraphrased seeds are rejected: the rule is
/// deliberately conservative.
pub fn validate_generation(example: SyntheticExample, seed: &SeedTriplet) -> SyntheticExample {
    debug_assert_eq!(example.seed_id, seed.id);
    let valid = contains_form(&example.text, seed.form(example.label))
        && LABELS.iter().filter(|&&l| l != example.label).all(|&l| !contains_form(&example.text, seed.form(l)));
    SyntheticExample { valid, ..example }
}

/// Validates every example against its seed; examples whose seed id is
/// unknown are marked invalid.
pub fn validate_all(examples: Vec<SyntheticExample>, seeds: &[SeedTriplet]) -> Vec<SyntheticExample> {
    let index: HashMap<&str, &SeedTriplet> = seeds.iter().map(|s| (s.id.as_str(), s)).collect();
    examples
        .into_iter()
        .map(|e| match index.get(e.seed_id.as_str()) {
            Some(seed) => validate_generation(e, seed),
            None => SyntheticExample { valid: false, ..e },
        })
        .collect()
}
