use std::io::Write;

use thiserror::Error;

use super::{Round, SyntheticExample};

pub const SYNTHETIC_HEADER: &str = "TEXT\tLABEL\tSEED_ID\tROUND\tVALID";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyntheticFormatError {
    #[error("input is not valid UTF-8")]
    Encoding,
    #[error("expected header {SYNTHETIC_HEADER:?}, found {0:?}")]
    BadHeader(String),
    #[error("line {line}: expected 5 columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: bad {column} value {value:?}")]
    BadValue { line: usize, column: &'static str, value: String },
    #[error("example {index}: field contains a tab or newline")]
    Unwritable { index: usize },
    #[error("I/O error: {0}")]
    Io(String),
}

/// Writes `SYNTHETIC_HEADER` then one row per example; VALID is 0 or 1.
pub fn write_synthetic<W: Write>(mut w: W, examples: &[SyntheticExample]) -> Result<(), SyntheticFormatError> {
    let io = |e: std::io::Error| SyntheticFormatError::Io(e.to_string());
    writeln!(w, "{SYNTHETIC_HEADER}").map_err(io)?;
    for (index, e) in examples.iter().enumerate() {
        if [&e.text, &e.seed_id].iter().any(|f| f.contains(['\t', '\n', '\r'])) {
            return Err(SyntheticFormatError::Unwritable { index });
        }
        writeln!(w, "{}\t{}\t{}\t{}\t{}", e.text, e.label, e.seed_id, e.round, u8::from(e.valid)).map_err(io)?;
    }
    Ok(())
}

pub fn parse_synthetic(bytes: &[u8]) -> Result<Vec<SyntheticExample>, SyntheticFormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| SyntheticFormatError::Encoding)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == SYNTHETIC_HEADER => {}
        Some((_, h)) => return Err(SyntheticFormatError::BadHeader(h.to_owned())),
        None => return Err(SyntheticFormatError::BadHeader(String::new())),
    }
    let mut out = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        let [text, label, seed_id, round, valid] = cols[..] else {
            return Err(SyntheticFormatError::ColumnCount { line, found: cols.len() });
        };
        let bad = |column, value: &str| SyntheticFormatError::BadValue { line, column, value: value.to_owned() };
        out.push(SyntheticExample {
            text: text.to_owned(),
            label: label.parse().map_err(|_| bad("LABEL", label))?,
            seed_id: seed_id.to_owned(),
            round: round.parse::<Round>().map_err(|_| bad("ROUND", round))?,
            valid: match valid {
                "1" => true,
                "0" => false,
                v => return Err(bad("VALID", v)),
            },
        });
    }
    Ok(out)
}
