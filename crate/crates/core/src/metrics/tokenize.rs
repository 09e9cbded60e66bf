//! The `13a` tokenizer used by mteval-v13a and sacreBLEU.

use std::sync::OnceLock;

use regex::Regex;

struct Rules {
    symbols: Regex,
    period_comma_after_non_digit: Regex,
    period_comma_before_non_digit: Regex,
    dash_after_digit: Regex,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        symbols: Regex::new(r"([\{-~\[-` -&\(-\+:-@/])").unwrap(),
        period_comma_after_non_digit: Regex::new(r"([^0-9])([\.,])").unwrap(),
        period_comma_before_non_digit: Regex::new(r"([\.,])([^0-9])").unwrap(),
        dash_after_digit: Regex::new(r"([0-9])(-)").unwrap(),
    })
}

/// Applies the 13a normalization and returns the padded, single-spaced line.
pub fn normalize_13a(text: &str) -> String {
    let mut line = text.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let line = format!(" {line} ");
    let r = rules();
    let line = r.symbols.replace_all(&line, " ${1} ");
    let line = r.period_comma_after_non_digit.replace_all(&line, "${1} ${2} ");
    let line = r.period_comma_before_non_digit.replace_all(&line, " ${1} ${2}");
    let line = r.dash_after_digit.replace_all(&line, "${1} ${2} ");
    line.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Tokenizes `text` with the 13a rules.
pub fn tokenize_13a(text: &str) -> Vec<String> {
    normalize_13a(text)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Lowercased 13a tokens, as used by TER and METEOR.
pub(crate) fn tokenize_13a_lower(text: &str) -> Vec<String> {
    tokenize_13a(&text.to_lowercase())
}
