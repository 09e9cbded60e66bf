//! The corpus TSV format.
//!
//! ```text
//! ID  SET  CATEGORY  COMMON  SRC  REF-G  REF-N1  REF-N2  REF-N3
//! ```
//!
//! Tab separated, no quoting, `\n` line endings on write (`\r\n` accepted on
//! read). REF-N2 and REF-N3 are empty unless COMMON is 1.

use std::collections::HashSet;
use std::io::Write;

use super::{Corpus, CorpusEntry, CorpusError, GenderCategory, SetTag};

pub const HEADER: [&str; 9] = ["ID", "SET", "CATEGORY", "COMMON", "SRC", "REF-G", "REF-N1", "REF-N2", "REF-N3"];

pub fn parse_corpus(name: &str, input: &[u8]) -> Result<Corpus, CorpusError> {
    let text = std::str::from_utf8(input).map_err(|e| CorpusError::Encoding(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));

    let header = lines.next().filter(|l| !l.is_empty()).ok_or(CorpusError::MissingHeader)?;
    if header.split('\t').ne(HEADER.iter().copied()) {
        return Err(CorpusError::BadHeader { expected: HEADER.join("\t") });
    }

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let entry = parse_row(line, line_no)?;
        if !seen.insert(entry.id.clone()) {
            return Err(CorpusError::DuplicateId { line: line_no, id: entry.id });
        }
        entries.push(entry);
    }
    Ok(Corpus::new(name, entries))
}

fn parse_row(line: &str, line_no: usize) -> Result<CorpusEntry, CorpusError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != HEADER.len() {
        return Err(CorpusError::ColumnCount { line: line_no, expected: HEADER.len(), found: cols.len() });
    }
    let invalid = |column: &'static str, value: &str| CorpusError::InvalidCode { line: line_no, column, value: value.to_owned() };
    let non_empty = |column: &'static str, value: &str| {
        if value.trim().is_empty() {
            Err(CorpusError::EmptyField { line: line_no, column })
        } else {
            Ok(value.to_owned())
        }
    };

    let id = non_empty("ID", cols[0])?;
    let set_tag: SetTag = cols[1].parse().map_err(|v: String| invalid("SET", &v))?;
    let category: GenderCategory = cols[2].parse().map_err(|v: String| invalid("CATEGORY", &v))?;
    if category.set_tag() != set_tag {
        return Err(CorpusError::CategoryMismatch { line: line_no, category, set: set_tag });
    }
    let common_set = match cols[3] {
        "0" => false,
        "1" => true,
        other => return Err(invalid("COMMON", other)),
    };
    let source = non_empty("SRC", cols[4])?;
    let ref_g = non_empty("REF-G", cols[5])?;
    let neutral_refs: Vec<String> = if common_set {
        let present = cols[6..9].iter().filter(|c| !c.trim().is_empty()).count();
        if present != 3 {
            return Err(CorpusError::MissingNeutralRefs { line: line_no, found: present });
        }
        cols[6..9].iter().map(|s| s.to_string()).collect()
    } else {
        if !cols[7].is_empty() || !cols[8].is_empty() {
            return Err(CorpusError::UnexpectedNeutralRefs { line: line_no });
        }
        vec![non_empty("REF-N1", cols[6])?]
    };
    if let Some(i) = neutral_refs.iter().position(|r| *r == ref_g) {
        return Err(CorpusError::IdenticalReferences { line: line_no, index: i + 1 });
    }
    Ok(CorpusEntry { id, set_tag, category, common_set, source, ref_g, neutral_refs })
}

fn check_field(id: &str, column: &'static str, value: &str) -> Result<(), CorpusError> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(CorpusError::UnencodableField { id: id.to_owned(), column });
    }
    Ok(())
}

/// Writes `corpus` in the TSV format.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    let text = serialize_corpus(corpus).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    out.write_all(text.as_bytes())
}

pub fn serialize_corpus(corpus: &Corpus) -> Result<String, CorpusError> {
    let mut out = HEADER.join("\t");
    out.push('\n');
    for e in &corpus.entries {
        let n = |i: usize| e.neutral_refs.get(i).map(String::as_str).unwrap_or("");
        let fields: [(&'static str, &str); 9] = [
            ("ID", &e.id),
            ("SET", e.set_tag.code()),
            ("CATEGORY", e.category.code()),
            ("COMMON", if e.common_set { "1" } else { "0" }),
            ("SRC", &e.source),
            ("REF-G", &e.ref_g),
            ("REF-N1", n(0)),
            ("REF-N2", n(1)),
            ("REF-N3", n(2)),
        ];
        for (i, (column, value)) in fields.iter().enumerate() {
            check_field(&e.id, column, value)?;
            if i > 0 {
                out.push('\t');
            }
            out.push_str(value);
        }
        out.push('\n');
    }
    Ok(out)
}
