//! The two-line timeline export.
//!
//! Line 1 holds the subject id and one node code per timeline item; line 2
//! starts with an empty field and holds the matching `MM/DD/YY` dates. No
//! quoting: subject ids and codes never contain commas.

use std::collections::HashMap;

use chrono::NaiveDate;

use super::date::{format_date, parse_date};
use super::CodecError;
use crate::model::catalog::{self, NodeCategory};
use crate::model::{validate, CareEvent, EventId, PathwayRecord};

/// Label given to `Other` events read from CSV, which carries codes only.
pub const UNSPECIFIED_LABEL: &str = "(unspecified)";

/// Export filename for a subject, e.g. `PTC-Example123.txt`.
pub fn export_filename(subject_id: &str, csv_suffix: bool) -> String {
    let ext = if csv_suffix { "csv" } else { "txt" };
    format!("PTC-{subject_id}.{ext}")
}

pub fn export_csv(p: &PathwayRecord) -> Result<String, CodecError> {
    let violations = validate(p);
    if !violations.is_empty() {
        return Err(CodecError::InvalidPathway(violations));
    }
    let seq = p.sorted_sequence();
    let mut codes = String::from(p.subject_id.as_str());
    let mut dates = String::new();
    for item in &seq {
        codes.push(',');
        codes.push_str(item.code());
        dates.push(',');
        dates.push_str(&format_date(item.date())?);
    }
    codes.push('\n');
    codes.push_str(&dates);
    codes.push('\n');
    Ok(codes)
}

fn split_lines(text: &str) -> Vec<&str> {
    let body = text
        .strip_suffix("\r\n")
        .or_else(|| text.strip_suffix('\n'))
        .unwrap_or(text);
    if body.is_empty() {
        return Vec::new();
    }
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect()
}

/// Reads an export back into a pathway. Same-day order follows column
/// position; `Other` columns resolve to the community node.
pub fn parse_csv(text: &str) -> Result<PathwayRecord, CodecError> {
    let lines = split_lines(text);
    if lines.len() != 2 {
        return Err(CodecError::RowCountMismatch(lines.len()));
    }
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    if header.len() != row.len() {
        return Err(CodecError::ColumnCountMismatch {
            header: header.len(),
            dates: row.len(),
        });
    }
    let n = header.len();
    if n < 4 {
        return Err(CodecError::MissingAnchors(format!(
            "need subject id plus Onset, Consent, Admission; found {} fields",
            n
        )));
    }
    if header[1] != catalog::ONSET {
        return Err(CodecError::MissingAnchors(format!(
            "first item must be Onset, found {:?}",
            header[1]
        )));
    }
    if header[n - 2] != catalog::CONSENT || header[n - 1] != catalog::ADMISSION {
        return Err(CodecError::MissingAnchors(format!(
            "last items must be Consent, Admission; found {:?}, {:?}",
            header[n - 2],
            header[n - 1]
        )));
    }
    if !row[0].is_empty() {
        return Err(CodecError::UnexpectedLeadingField(row[0].to_string()));
    }

    let dates = row[1..]
        .iter()
        .map(|t| parse_date(t))
        .collect::<Result<Vec<NaiveDate>, _>>()?;
    let onset = dates[0];
    let consent = dates[n - 3];
    let admission = dates[n - 2];

    // Consent sits before Admission by convention, not by date, so it is left
    // out of the chronology chain and checked as an anchor instead.
    let chain = (1..n - 2).chain(std::iter::once(n - 1));
    let mut prev = onset;
    for col in chain {
        let date = dates[col - 1];
        if date < prev {
            return Err(CodecError::NonChronological {
                column: col,
                code: header[col].to_string(),
            });
        }
        prev = date;
    }

    let mut next_order: HashMap<NaiveDate, u32> = HashMap::new();
    let events = (2..n - 2)
        .map(|col| {
            let code = header[col];
            let date = dates[col - 1];
            let category = catalog::lookup_event_code(code)
                .map(|node| node.category)
                .unwrap_or(NodeCategory::Community);
            let slot = next_order.entry(date).or_insert(0);
            let order = *slot;
            *slot += 1;
            CareEvent {
                id: EventId::from(format!("c{col}")),
                category,
                code: code.to_string(),
                custom_label: (code == catalog::OTHER).then(|| UNSPECIFIED_LABEL.to_string()),
                date,
                order,
            }
        })
        .collect();

    let p = PathwayRecord {
        subject_id: header[0].to_string(),
        onset,
        consent,
        admission,
        events,
        version: 1,
    };
    let violations = validate(&p);
    if !violations.is_empty() {
        return Err(CodecError::ParseValidation(violations));
    }
    Ok(p)
}
