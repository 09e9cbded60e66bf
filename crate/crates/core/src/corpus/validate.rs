use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Corpus, GenderCategory, SetTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationOptions {
    /// Largest allowed |Set-N - Set-G| count difference.
    pub set_tolerance: usize,
    /// Largest allowed |F - M| count difference within Set-G.
    pub gender_tolerance: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { set_tolerance: 0, gender_tolerance: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    EmptyCorpus,
    SetImbalance { set_n: usize, set_g: usize, tolerance: usize },
    GenderImbalance { feminine: usize, masculine: usize, tolerance: usize },
    IdenticalReferences { id: String, neutral_index: usize },
    EmptyField { id: String, field: String },
    CategoryMismatch { id: String, category: GenderCategory, set: SetTag },
    NeutralRefCount { id: String, expected: usize, found: usize },
    DuplicateId { id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: usize,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks balance and per-entry invariants. Every problem is a finding; the
/// report is empty iff the corpus is valid.
pub fn validate(corpus: &Corpus, options: &ValidationOptions) -> ValidationReport {
    let mut findings = Vec::new();
    if corpus.is_empty() {
        findings.push(Finding::EmptyCorpus);
        return ValidationReport { entries: 0, findings };
    }

    let mut seen = HashSet::new();
    for e in &corpus.entries {
        if !seen.insert(e.id.as_str()) {
            findings.push(Finding::DuplicateId { id: e.id.clone() });
        }
        if e.category.set_tag() != e.set_tag {
            findings.push(Finding::CategoryMismatch { id: e.id.clone(), category: e.category, set: e.set_tag });
        }
        let mut empty = |field: String, value: &str| {
            if value.trim().is_empty() {
                findings.push(Finding::EmptyField { id: e.id.clone(), field });
            }
        };
        empty("id".into(), &e.id);
        empty("source".into(), &e.source);
        empty("ref_g".into(), &e.ref_g);
        for (i, r) in e.neutral_refs.iter().enumerate() {
            empty(format!("ref_n{}", i + 1), r);
        }
        if e.neutral_refs.len() != e.expected_neutral_refs() {
            findings.push(Finding::NeutralRefCount {
                id: e.id.clone(),
                expected: e.expected_neutral_refs(),
                found: e.neutral_refs.len(),
            });
        }
        for (i, r) in e.neutral_refs.iter().enumerate() {
            if *r == e.ref_g {
                findings.push(Finding::IdenticalReferences { id: e.id.clone(), neutral_index: i + 1 });
            }
        }
    }

    let set_n = corpus.by_set(SetTag::SetN).count();
    let set_g = corpus.by_set(SetTag::SetG).count();
    if set_n.abs_diff(set_g) > options.set_tolerance {
        findings.push(Finding::SetImbalance { set_n, set_g, tolerance: options.set_tolerance });
    }
    let feminine = corpus.entries.iter().filter(|e| e.category == GenderCategory::Feminine).count();
    let masculine = corpus.entries.iter().filter(|e| e.category == GenderCategory::Masculine).count();
    if feminine.abs_diff(masculine) > options.gender_tolerance {
        findings.push(Finding::GenderImbalance { feminine, masculine, tolerance: options.gender_tolerance });
    }
    ValidationReport { entries: corpus.len(), findings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusEntry;

    fn entry(id: usize, category: GenderCategory) -> CorpusEntry {
        CorpusEntry {
            id: format!("e{id}"),
            set_tag: category.set_tag(),
            category,
            common_set: false,
            source: format!("source {id}"),
            ref_g: format!("gendered {id}"),
            neutral_refs: vec![format!("neutral {id}")],
        }
    }

    fn corpus(n: usize, f: usize, m: usize) -> Corpus {
        let mut entries = Vec::new();
        let cats = std::iter::repeat(GenderCategory::Neutral)
            .take(n)
            .chain(std::iter::repeat(GenderCategory::Feminine).take(f))
            .chain(std::iter::repeat(GenderCategory::Masculine).take(m));
        for (i, c) in cats.enumerate() {
            entries.push(entry(i, c));
        }
        Corpus::new("t", entries)
    }

    #[test]
    fn balanced_corpus_is_valid() {
        let r = validate(&corpus(750, 375, 375), &ValidationOptions::default());
        assert!(r.is_valid(), "{:?}", r.findings);
        assert_eq!(r.entries, 1500);
    }

    #[test]
    fn set_imbalance_reports_counts() {
        let r = validate(&corpus(740, 380, 380), &ValidationOptions::default());
        assert_eq!(r.findings, vec![Finding::SetImbalance { set_n: 740, set_g: 760, tolerance: 0 }]);
        let loose = ValidationOptions { set_tolerance: 20, ..Default::default() };
        assert!(validate(&corpus(740, 380, 380), &loose).is_valid());
    }

    #[test]
    fn gender_imbalance() {
        let r = validate(&corpus(4, 3, 1), &ValidationOptions::default());
        assert_eq!(r.findings, vec![Finding::GenderImbalance { feminine: 3, masculine: 1, tolerance: 0 }]);
    }

    #[test]
    fn identical_and_empty_fields() {
        let mut c = corpus(1, 1, 1);
        c.entries[0].neutral_refs[0] = c.entries[0].ref_g.clone();
        c.entries[1].source = "  ".into();
        let r = validate(&c, &ValidationOptions { set_tolerance: 1, ..Default::default() });
        assert_eq!(
            r.findings,
            vec![
                Finding::IdenticalReferences { id: "e0".into(), neutral_index: 1 },
                Finding::EmptyField { id: "e1".into(), field: "source".into() },
            ]
        );
    }

    #[test]
    fn structural_findings() {
        let mut c = corpus(1, 0, 0);
        c.entries.push(entry(0, GenderCategory::Neutral));
        c.entries[0].common_set = true;
        c.entries[1].set_tag = SetTag::SetG;
        let r = validate(&c, &ValidationOptions { set_tolerance: 5, gender_tolerance: 5 });
        assert!(r.findings.contains(&Finding::DuplicateId { id: "e0".into() }));
        assert!(r.findings.contains(&Finding::NeutralRefCount { id: "e0".into(), expected: 3, found: 1 }));
        assert!(r.findings.iter().any(|f| matches!(f, Finding::CategoryMismatch { .. })));
    }

    #[test]
    fn empty_corpus_is_a_finding() {
        let r = validate(&Corpus::default(), &ValidationOptions::default());
        assert_eq!(r.findings, vec![Finding::EmptyCorpus]);
    }

    #[test]
    fn report_json_has_stable_keys() {
        let r = validate(&corpus(2, 1, 0), &ValidationOptions::default());
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"entries":3,"findings":[{"kind":"set_imbalance","set_n":2,"set_g":1,"tolerance":0},{"kind":"gender_imbalance","feminine":1,"masculine":0,"tolerance":0}]}"#
        );
    }
}
