//! System-output TSV (`ENTRY_ID  TEXT  [POSTEDIT_SOURCE]`) and the verdict
//! dump (`ENTRY_ID  METRIC  S_N  S_G  PRED  GOLD`).

use thiserror::Error;

use super::{ContrastiveVerdict, SystemOutput};
use crate::report::round2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OutputFormatError {
    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),
    #[error("expected header `ENTRY_ID\\tTEXT` or `ENTRY_ID\\tTEXT\\tPOSTEDIT_SOURCE`")]
    BadHeader,
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: invalid POSTEDIT_SOURCE `{value}`")]
    BadSource { line: usize, value: String },
}

pub fn parse_outputs(input: &[u8]) -> Result<Vec<SystemOutput>, OutputFormatError> {
    let text = std::str::from_utf8(input).map_err(|e| OutputFormatError::Encoding(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let columns = match lines.next() {
        Some("ENTRY_ID\tTEXT") => 2,
        Some("ENTRY_ID\tTEXT\tPOSTEDIT_SOURCE") => 3,
        _ => return Err(OutputFormatError::BadHeader),
    };
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != columns {
            return Err(OutputFormatError::ColumnCount { line: line_no, expected: columns, found: cols.len() });
        }
        let postedit_source = match cols.get(2) {
            None | Some(&"") => None,
            Some(v) => Some(
                v.parse::<usize>()
                    .ok()
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| OutputFormatError::BadSource { line: line_no, value: v.to_string() })?,
            ),
        };
        out.push(SystemOutput { entry_id: cols[0].to_owned(), text: cols[1].to_owned(), postedit_source });
    }
    Ok(out)
}

pub fn verdicts_tsv(verdicts: &[ContrastiveVerdict]) -> String {
    let mut s = String::from("ENTRY_ID\tMETRIC\tS_N\tS_G\tPRED\tGOLD\n");
    for v in verdicts {
        s.push_str(&format!(
            "{}\t{}\t{:.2}\t{:.2}\t{}\t{}\n",
            v.entry_id,
            v.metric,
            round2(v.score_vs_neutral),
            round2(v.score_vs_gendered),
            v.predicted.code(),
            v.gold
        ));
    }
    s
}
