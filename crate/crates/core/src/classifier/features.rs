use std::hash::Hasher;

use fnv::FnvHasher;

/// Hashed feature space: 2^18 buckets, collisions allowed.
pub const DIM_BITS: u32 = 18;
pub const DIM: usize = 1 << DIM_BITS;

/// Closed list of Italian articles, articulated prepositions and
/// demonstratives, matched as whole lowercase tokens (elided forms keep
/// their apostrophe).
pub const DETERMINERS: &[&str] = &[
    "il", "lo", "la", "i", "gli", "le", "l'", "un", "uno", "una", "un'", "del", "dello", "della", "dei", "degli", "delle", "dell'", "al", "allo",
    "alla", "ai", "agli", "alle", "all'", "dal", "dallo", "dalla", "dai", "dagli", "dalle", "dall'", "nel", "nello", "nella", "nei", "negli",
    "nelle", "nell'", "sul", "sullo", "sulla", "sui", "sugli", "sulle", "sull'", "questo", "questa", "questi", "queste", "quest'", "quello",
    "quella", "quei", "quegli", "quelle", "quel", "quell'",
];

/// Sparse, L2-normalized vector over `DIM` buckets; indices strictly
/// increasing and values nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    /// Sums duplicate indices, drops zeros and normalizes to unit length.
    pub fn from_raw(mut raw: Vec<(u32, f64)>) -> Self {
        debug_assert!(raw.iter().all(|(i, _)| (*i as usize) < DIM));
        raw.sort_by_key(|(i, _)| *i);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(raw.len());
        for (i, v) in raw {
            match entries.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|(_, v)| *v != 0.0);
        let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut entries {
                *v /= norm;
            }
        }
        FeatureVector { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i as usize]).sum()
    }
}

/// FNV-1a 64 of the feature name, truncated to the low `DIM_BITS` bits.
pub fn feature_index(name: &str) -> u32 {
    let mut h = FnvHasher::default();
    h.write(name.as_bytes());
    (h.finish() & (DIM as u64 - 1)) as u32
}

/// Lowercase tokens: letter runs keeping one trailing apostrophe (so `l'`
/// and `un'` stay distinct from `l` and `un`), or digit runs.
pub fn tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut chars = lower.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphabetic() {
            let mut tok = String::from(c);
            while let Some(&n) = chars.peek() {
                if n.is_alphabetic() {
                    tok.push(n);
                    chars.next();
                } else {
                    break;
                }
            }
            if matches!(chars.peek(), Some('\'' | '’')) {
                chars.next();
                tok.push('\'');
            }
            out.push(tok);
        } else if c.is_numeric() {
            let mut tok = String::from(c);
            while let Some(&n) = chars.peek().filter(|n| n.is_numeric()) {
                tok.push(n);
                chars.next();
            }
            out.push(tok);
        }
    }
    out
}

/// Feature names before hashing, in extraction order: character 2..5-grams
/// of the lowercased, whitespace-collapsed text between `^` and `$`, then
/// per-token suffixes of length 1..3 (tokens longer than the suffix), then
/// determiner tokens.
pub fn feature_names(text: &str) -> Vec<String> {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    if collapsed.is_empty() {
        return Vec::new();
    }
    let mut names = Vec::new();
    let chars: Vec<char> = std::iter::once('^').chain(collapsed.chars()).chain(std::iter::once('$')).collect();
    for n in 2..=5 {
        for w in chars.windows(n) {
            names.push(format!("c{n}:{}", w.iter().collect::<String>()));
        }
    }
    let toks = tokens(&collapsed);
    for tok in &toks {
        let word: Vec<char> = tok.trim_end_matches('\'').chars().collect();
        for k in 1..=3 {
            if word.len() > k {
                names.push(format!("s{k}:{}", word[word.len() - k..].iter().collect::<String>()));
            }
        }
    }
    for tok in &toks {
        if DETERMINERS.contains(&tok.as_str()) {
            names.push(format!("d:{tok}"));
        }
    }
    names
}

pub fn featurize(text: &str) -> FeatureVector {
    FeatureVector::from_raw(feature_names(text).iter().map(|n| (feature_index(n), 1.0)).collect())
}

/// Text features plus externally computed sentence-embedding dimensions,
/// hashed as `e:<i>`; the union is normalized as a whole.
pub fn featurize_with_embedding(text: &str, embedding: &[f64]) -> FeatureVector {
    let mut raw: Vec<(u32, f64)> = feature_names(text).iter().map(|n| (feature_index(n), 1.0)).collect();
    raw.extend(embedding.iter().enumerate().map(|(i, &v)| (feature_index(&format!("e:{i}")), v)));
    FeatureVector::from_raw(raw)
}
